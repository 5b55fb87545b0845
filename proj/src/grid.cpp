#include "ofdmlink/grid.hpp"

#include <cmath>
#include <numbers>

namespace ofdmlink {

PilotPattern::PilotPattern(std::string name, OfdmDims dims, std::vector<std::uint8_t> mask, ComplexGrid values,
                           std::uint64_t seed)
    : name_(std::move(name)), dims_(dims), mask_(std::move(mask)), values_(std::move(values)), seed_(seed) {
    if (mask_.size() != dims_.size() || !(values_.dims() == dims_)) {
        throw DimensionError("PilotPattern: mask/value grid does not match dims");
    }
    for (std::size_t k = 0; k < mask_.size(); ++k) {
        if (mask_[k] != 0) {
            if (std::abs(std::abs(values_[k]) - 1.0) > 1e-12) {
                throw DomainError("PilotPattern: pilot values must have unit modulus");
            }
            pilot_indices_.push_back(k);
        } else {
            if (values_[k] != cplx{}) throw DomainError("PilotPattern: data REs must carry zero pilot value");
            data_indices_.push_back(k);
        }
    }
}

PilotPattern make_pilot_pattern(const std::string& name, const OfdmDims& dims, std::uint64_t seed) {
    std::vector<std::size_t> pilot_symbols;
    if (name == "1P") {
        pilot_symbols = {2};
    } else if (name == "2P") {
        pilot_symbols = {2, 11};
    } else if (name != "none") {
        throw DomainError("make_pilot_pattern: unknown pattern '" + name + "'");
    }
    if (!pilot_symbols.empty() && (dims.n_symbols != 14 || dims.n_subcarriers % 2 != 0)) {
        throw DomainError("make_pilot_pattern: pattern '" + name +
                          "' needs 14 OFDM symbols and an even number of subcarriers");
    }

    std::vector<std::uint8_t> mask(dims.size(), 0);
    for (std::size_t t : pilot_symbols) {
        for (std::size_t s = 0; s < dims.n_subcarriers; s += 2) mask[dims.flat(s, t)] = 1;
    }
    ComplexGrid values(dims);
    SplitMix64 gen(seed);
    const double a = std::numbers::sqrt2 / 2.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k] == 0) continue;
        const std::uint64_t bits = gen.next();
        values[k] = {(bits & 1U) ? -a : a, (bits & 2U) ? -a : a};
    }
    return PilotPattern(name, dims, std::move(mask), std::move(values), seed);
}

void FramePlan::use_identity_interleaver() {
    for (std::size_t q = 0; q < interleaver.size(); ++q) interleaver[q] = static_cast<std::uint32_t>(q);
    interleaver_seed = 0;
}

FramePlan plan_frame(const PilotPattern& pattern, std::size_t code_length, std::size_t bits_per_symbol,
                     std::uint64_t interleaver_seed, std::size_t frames_per_block) {
    if (code_length == 0 || bits_per_symbol == 0 || frames_per_block == 0) {
        throw DomainError("plan_frame: code length, bits per symbol and frames per block must be positive");
    }
    FramePlan plan;
    plan.dims = pattern.dims();
    plan.data_indices = pattern.data_indices();
    plan.bits_per_symbol = bits_per_symbol;
    plan.code_length = code_length;
    plan.frames_per_block = frames_per_block;
    const std::size_t capacity = plan.block_capacity();
    plan.codewords = capacity / code_length;
    if (plan.codewords == 0) {
        throw DomainError("plan_frame: block capacity of " + std::to_string(capacity) +
                          " bits cannot hold one codeword of " + std::to_string(code_length));
    }
    plan.padding_bits = capacity - plan.codewords * code_length;
    plan.interleaver_seed = interleaver_seed;
    plan.interleaver = seeded_permutation(capacity, interleaver_seed);
    return plan;
}

namespace {

std::size_t slot_to_frame_entry(const FramePlan& plan, std::size_t slot, std::size_t& frame) {
    const std::size_t per_frame = plan.bits_per_frame();
    frame = slot / per_frame;
    const std::size_t local = slot % per_frame;
    const std::size_t re = plan.data_indices[local / plan.bits_per_symbol];
    return re * plan.bits_per_symbol + local % plan.bits_per_symbol;
}

}  // namespace

std::vector<BitFrame> assemble(const FramePlan& plan, const std::vector<std::vector<std::uint8_t>>& codewords,
                               Rng& padding_rng) {
    if (codewords.size() != plan.codewords) throw DimensionError("assemble: wrong number of codewords");
    std::vector<std::uint8_t> stream;
    stream.reserve(plan.block_capacity());
    for (const auto& cw : codewords) {
        if (cw.size() != plan.code_length) throw DimensionError("assemble: wrong codeword length");
        stream.insert(stream.end(), cw.begin(), cw.end());
    }
    std::bernoulli_distribution coin(0.5);
    for (std::size_t p = 0; p < plan.padding_bits; ++p) stream.push_back(coin(padding_rng) ? 1 : 0);

    std::vector<BitFrame> frames(plan.frames_per_block, BitFrame(plan.dims.size() * plan.bits_per_symbol, 0));
    for (std::size_t q = 0; q < stream.size(); ++q) {
        std::size_t f = 0;
        const std::size_t entry = slot_to_frame_entry(plan, q, f);
        frames[f][entry] = stream[plan.interleaver[q]];
    }
    return frames;
}

std::vector<std::vector<double>> disassemble(const FramePlan& plan, const std::vector<LlrFrame>& frames) {
    if (frames.size() != plan.frames_per_block) throw DimensionError("disassemble: wrong number of frames");
    for (const auto& f : frames) {
        if (f.size() != plan.dims.size() * plan.bits_per_symbol) throw DimensionError("disassemble: frame size");
    }
    const std::size_t coded = plan.codewords * plan.code_length;
    std::vector<std::vector<double>> out(plan.codewords, std::vector<double>(plan.code_length));
    for (std::size_t q = 0; q < plan.block_capacity(); ++q) {
        const std::size_t pos = plan.interleaver[q];
        if (pos >= coded) continue;
        std::size_t f = 0;
        const std::size_t entry = slot_to_frame_entry(plan, q, f);
        out[pos / plan.code_length][pos % plan.code_length] = frames[f][entry];
    }
    return out;
}

std::vector<LlrFrame> scatter_soft(const FramePlan& plan, const std::vector<std::vector<double>>& codewords,
                                   double padding_value) {
    if (codewords.size() != plan.codewords) throw DimensionError("scatter_soft: wrong number of codewords");
    for (const auto& c : codewords) {
        if (c.size() != plan.code_length) throw DimensionError("scatter_soft: wrong codeword length");
    }
    const std::size_t coded = plan.codewords * plan.code_length;
    std::vector<LlrFrame> frames(plan.frames_per_block, LlrFrame(plan.dims.size() * plan.bits_per_symbol, 0.0));
    for (std::size_t q = 0; q < plan.block_capacity(); ++q) {
        const std::size_t pos = plan.interleaver[q];
        std::size_t f = 0;
        const std::size_t entry = slot_to_frame_entry(plan, q, f);
        frames[f][entry] = pos < coded ? codewords[pos / plan.code_length][pos % plan.code_length] : padding_value;
    }
    return frames;
}

nlohmann::json pattern_to_json(const PilotPattern& pattern) {
    // Run lengths over vec() order, alternating data / pilot, starting with data.
    std::vector<std::size_t> runs;
    std::uint8_t current = 0;
    std::size_t length = 0;
    for (std::uint8_t m : pattern.mask()) {
        if (m != current) {
            runs.push_back(length);
            current = m;
            length = 0;
        }
        ++length;
    }
    runs.push_back(length);
    return {{"name", pattern.name()},
            {"n_subcarriers", pattern.dims().n_subcarriers},
            {"n_symbols", pattern.dims().n_symbols},
            {"pilot_seed", pattern.seed()},
            {"mask_rle", runs}};
}

PilotPattern pattern_from_json(const nlohmann::json& j) {
    try {
        const OfdmDims dims(j.at("n_subcarriers").get<std::size_t>(), j.at("n_symbols").get<std::size_t>());
        PilotPattern p = make_pilot_pattern(j.at("name").get<std::string>(), dims, j.at("pilot_seed").get<std::uint64_t>());
        if (j.contains("mask_rle")) {
            const nlohmann::json expected = pattern_to_json(p).at("mask_rle");
            if (j.at("mask_rle") != expected) throw FormatError("pattern JSON: mask_rle does not match named pattern");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("pattern JSON: ") + e.what());
    }
}

nlohmann::json plan_to_json(const FramePlan& plan, const PilotPattern& pattern) {
    bool identity = true;
    for (std::size_t q = 0; q < plan.interleaver.size() && identity; ++q) identity = plan.interleaver[q] == q;
    return {{"schema_version", 1},
            {"pattern", pattern_to_json(pattern)},
            {"bits_per_symbol", plan.bits_per_symbol},
            {"code_length", plan.code_length},
            {"frames_per_block", plan.frames_per_block},
            {"codewords", plan.codewords},
            {"padding_bits", plan.padding_bits},
            {"interleaver", identity ? "identity" : "splitmix64-fisher-yates"},
            {"interleaver_seed", plan.interleaver_seed}};
}

std::pair<FramePlan, PilotPattern> plan_from_json(const nlohmann::json& j) {
    try {
        PilotPattern pattern = pattern_from_json(j.at("pattern"));
        FramePlan plan = plan_frame(pattern, j.at("code_length").get<std::size_t>(),
                                    j.at("bits_per_symbol").get<std::size_t>(),
                                    j.at("interleaver_seed").get<std::uint64_t>(),
                                    j.value("frames_per_block", std::size_t{1}));
        if (j.value("interleaver", std::string{}) == "identity") plan.use_identity_interleaver();
        if (j.contains("codewords") && j.at("codewords").get<std::size_t>() != plan.codewords) {
            throw FormatError("plan JSON: codeword count inconsistent with pattern and code length");
        }
        if (j.contains("padding_bits") && j.at("padding_bits").get<std::size_t>() != plan.padding_bits) {
            throw FormatError("plan JSON: padding inconsistent with pattern and code length");
        }
        return {std::move(plan), std::move(pattern)};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("plan JSON: ") + e.what());
    }
}

}  // namespace ofdmlink
