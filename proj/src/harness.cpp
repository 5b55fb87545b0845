#include "ofdmlink/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ofdmlink/error.hpp"

namespace ofdmlink {

namespace {

constexpr std::size_t kCorrLanes = 8;
constexpr std::size_t kCorrChunk = 256;

void accumulate_chunk(const OfdmDims& dims, const RadioParams& radio, const CovarianceSpec& spec,
                      const std::vector<PowerDelayProfile>& pdps, std::size_t chunk, Eigen::MatrixXcd& acc) {
    const std::size_t begin = chunk * kCorrChunk;
    const std::size_t count = std::min(spec.samples, begin + kCorrChunk) - begin;
    Rng rng(derive_seed(spec.seed, chunk));
    std::uniform_int_distribution<std::size_t> pick(0, pdps.size() - 1);
    const auto n = static_cast<Eigen::Index>(dims.size());
    Eigen::MatrixXcd block(n, static_cast<Eigen::Index>(count));
    for (std::size_t l = 0; l < count; ++l) {
        MobilitySpec mob;
        mob.speed_mps = uniform_real(rng, spec.speed.lo, spec.speed.hi);
        mob.delay_spread_s = uniform_real(rng, spec.delay_spread.lo, spec.delay_spread.hi);
        const auto& pdp = pdps[pick(rng)];
        const ComplexGrid h = draw_channel(dims, radio, pdp, mob, rng);
        block.col(static_cast<Eigen::Index>(l)) = Eigen::Map<const Eigen::VectorXcd>(h.data(), n);
    }
    acc.selfadjointView<Eigen::Lower>().rankUpdate(block);
}

Eigen::MatrixXcd finish_correlation(const std::vector<Eigen::MatrixXcd>& lanes, std::size_t samples) {
    Eigen::MatrixXcd sum = lanes.front();
    for (std::size_t i = 1; i < lanes.size(); ++i) sum += lanes[i];
    sum /= static_cast<double>(samples);
    // Hermitian by construction: mirror the lower triangle.
    Eigen::MatrixXcd out = sum.selfadjointView<Eigen::Lower>();
    for (Eigen::Index k = 0; k < out.rows(); ++k) out(k, k) = out(k, k).real();
    return out;
}

std::vector<PowerDelayProfile> load_pdps(const std::vector<std::string>& names) {
    std::vector<PowerDelayProfile> out;
    for (const auto& n : names) out.push_back(named_pdp(n));
    if (out.empty()) throw ConfigError("no power delay profiles given");
    return out;
}

}  // namespace

Eigen::MatrixXcd estimate_correlation(const OfdmDims& dims, const RadioParams& radio, const CovarianceSpec& spec,
                                      int workers) {
    if (spec.samples == 0) throw DomainError("estimate_correlation: sample count must be positive");
    radio.validate();
    const auto pdps = load_pdps(spec.pdps);
    const auto n = static_cast<Eigen::Index>(dims.size());
    std::vector<Eigen::MatrixXcd> lanes(kCorrLanes, Eigen::MatrixXcd::Zero(n, n));
    const std::size_t chunks = (spec.samples + kCorrChunk - 1) / kCorrChunk;
    std::exception_ptr failure;
#pragma omp parallel for num_threads(std::max(1, workers)) schedule(static, 1)
    for (std::ptrdiff_t lane = 0; lane < static_cast<std::ptrdiff_t>(kCorrLanes); ++lane) {
        try {
            for (std::size_t c = static_cast<std::size_t>(lane); c < chunks; c += kCorrLanes) {
                accumulate_chunk(dims, radio, spec, pdps, c, lanes[static_cast<std::size_t>(lane)]);
            }
        } catch (...) {
#pragma omp critical(ofdmlink_corr_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return finish_correlation(lanes, spec.samples);
}

Eigen::MatrixXcd estimate_correlation_serial(const OfdmDims& dims, const RadioParams& radio,
                                             const CovarianceSpec& spec) {
    if (spec.samples == 0) throw DomainError("estimate_correlation: sample count must be positive");
    radio.validate();
    const auto pdps = load_pdps(spec.pdps);
    const auto n = static_cast<Eigen::Index>(dims.size());
    std::vector<Eigen::MatrixXcd> lanes(kCorrLanes, Eigen::MatrixXcd::Zero(n, n));
    const std::size_t chunks = (spec.samples + kCorrChunk - 1) / kCorrChunk;
    for (std::size_t lane = 0; lane < kCorrLanes; ++lane) {
        for (std::size_t c = lane; c < chunks; c += kCorrLanes) accumulate_chunk(dims, radio, spec, pdps, c, lanes[lane]);
    }
    return finish_correlation(lanes, spec.samples);
}

std::size_t frames_for_one_codeword(const PilotPattern& pattern, std::size_t bits_per_symbol,
                                    std::size_t code_length) {
    const std::size_t per_frame = pattern.data_count() * bits_per_symbol;
    if (per_frame == 0) throw DomainError("frames_for_one_codeword: no data REs");
    return (code_length + per_frame - 1) / per_frame;
}

Scenario prepare_scenario(const ScenarioConfig& config, int workers) {
    config.validate();
    Scenario s;
    s.config = config;
    s.radio = config.radio();
    s.pdps = load_pdps(config.pdps);
    s.code = &ieee80211n_1944_r23();

    switch (config.transmitter.kind) {
        case TransmitterKind::qam:
        case TransmitterKind::sip:
            s.constellation = gray_qam(config.bits_per_symbol);
            break;
        case TransmitterKind::gs:
            s.constellation = load_constellation(config.transmitter.constellation_file, config.bits_per_symbol);
            break;
    }
    s.pattern = make_pilot_pattern(config.pilots, config.dims, config.pilot_seed);
    const std::size_t fpb = config.frames_per_block != 0
                                ? config.frames_per_block
                                : frames_for_one_codeword(s.pattern, config.bits_per_symbol, s.code->length());
    s.plan = plan_frame(s.pattern, s.code->length(), config.bits_per_symbol, config.interleaver_seed, fpb);

    if (config.transmitter.kind == TransmitterKind::sip) {
        if (!config.transmitter.allocation_file.empty()) {
            s.sip = load_sip_allocation(config.transmitter.allocation_file, config.dims);
        } else {
            s.sip = make_sip_allocation(ResourceGrid<double>(config.dims, config.transmitter.uniform_fraction),
                                        config.transmitter.sip_seed);
        }
    }

    const bool needs_cov = config.receiver_covariance == ReceiverCovariance::empirical &&
                           std::any_of(config.receivers.begin(), config.receivers.end(),
                                       [](ReceiverKind k) { return k != ReceiverKind::perfect_csi; });
    if (needs_cov) {
        if (!config.covariance_file.empty() && std::filesystem::exists(config.covariance_file)) {
            s.covariance = tensor_to_matrix(read_tensor(config.covariance_file));
            const auto n = static_cast<Eigen::Index>(config.dims.size());
            if (s.covariance.rows() != n || s.covariance.cols() != n) {
                throw ConfigError("covariance_file does not match the grid size");
            }
        } else {
            s.covariance = tensor_to_matrix(
                matrix_to_tensor(estimate_correlation(config.dims, s.radio, config.covariance, workers)));
            if (!config.covariance_file.empty()) write_tensor(config.covariance_file, matrix_to_tensor(s.covariance));
        }
    }
    return s;
}

double point_sigma2(const Scenario& s, double snr_db) {
    const auto& c = s.config;
    switch (c.snr_axis) {
        case SnrAxis::eb_over_sigma2_db:
            return sigma2_for_eb_db(snr_db, s.pattern.rho(), c.bits_per_symbol, s.code->rate());
        case SnrAxis::es_over_sigma2_db:
            return sigma2_for_es_db(snr_db);
        case SnrAxis::sigma2_db:
            return db_to_linear(snr_db);
    }
    return 0.0;
}

namespace {

/// Transmit side of one block: the same for every point and receiver.
struct BlockDraw {
    std::vector<std::vector<std::uint8_t>> info;
    std::vector<BitFrame> bits;
    std::vector<ComplexGrid> x;
    std::vector<ComplexGrid> h;
    std::vector<MobilitySpec> mobility;
    std::vector<std::size_t> pdp_index;
};

BlockDraw draw_block(const Scenario& s, std::size_t block) {
    const auto& plan = s.plan;
    const auto& cfg = s.config;
    BlockDraw d;
    Rng bit_rng(derive_seed(cfg.seed, 1, block));
    Rng ch_rng(derive_seed(cfg.seed, 2, block));
    for (std::size_t c = 0; c < plan.codewords; ++c) {
        std::vector<std::uint8_t> info(s.code->dimension());
        for (auto& b : info) b = static_cast<std::uint8_t>(bit_rng() & 1U);
        d.info.push_back(std::move(info));
    }
    std::vector<std::vector<std::uint8_t>> cws;
    for (const auto& info : d.info) cws.push_back(s.code->encode(info));
    d.bits = assemble(plan, cws, bit_rng);

    std::uniform_int_distribution<std::size_t> pick(0, s.pdps.size() - 1);
    for (std::size_t f = 0; f < plan.frames_per_block; ++f) {
        MobilitySpec mob;
        mob.speed_mps = uniform_real(ch_rng, cfg.speed.lo, cfg.speed.hi);
        mob.delay_spread_s = uniform_real(ch_rng, cfg.delay_spread.lo, cfg.delay_spread.hi);
        const std::size_t p = pick(ch_rng);
        d.h.push_back(draw_channel(cfg.dims, s.radio, s.pdps[p], mob, ch_rng));
        d.mobility.push_back(mob);
        d.pdp_index.push_back(p);
        ComplexGrid x = map_bits(s.constellation, s.pattern, d.bits[f]);
        if (s.sip) x = sip_combine(x, *s.sip);
        d.x.push_back(std::move(x));
    }
    return d;
}

std::vector<ComplexGrid> receive(const Scenario& s, const BlockDraw& d, std::size_t block, double sigma2) {
    // Same unit-variance noise draws at every point.
    Rng noise_rng(derive_seed(s.config.seed, 3, block));
    std::vector<ComplexGrid> y;
    for (std::size_t f = 0; f < d.x.size(); ++f) {
        y.push_back(apply_channel(d.h[f], d.x[f], NoiseSpec::allow_zero(sigma2), noise_rng));
    }
    return y;
}

std::uint32_t count_errors(const LdpcCode& code, const std::vector<std::uint8_t>& info,
                           const std::vector<std::uint8_t>& decoded) {
    const auto got = code.extract_info(decoded);
    std::uint32_t e = 0;
    for (std::size_t j = 0; j < info.size(); ++j) e += got[j] != info[j] ? 1U : 0U;
    return e;
}

struct BlockOutcome {
    /// [point][receiver][codeword]
    std::vector<std::vector<std::vector<std::uint32_t>>> errors;
    std::vector<double> eb_sum;
    std::vector<double> es_sum;
    /// [point][receiver][frame], only when dumping
    std::vector<std::vector<std::vector<LlrFrame>>> llrs;
    std::vector<BitFrame> bits;
};

BlockOutcome run_block(const Scenario& s, std::size_t block, const std::vector<double>& sigma2, bool keep_llrs) {
    const auto& cfg = s.config;
    const BlockDraw d = draw_block(s, block);

    std::vector<Eigen::MatrixXcd> true_cov;
    std::vector<const Eigen::MatrixXcd*> cov;
    if (cfg.receiver_covariance == ReceiverCovariance::true_model) {
        for (std::size_t f = 0; f < d.h.size(); ++f) {
            true_cov.push_back(build_correlation(cfg.dims, s.radio, s.pdps[d.pdp_index[f]], d.mobility[f]).full());
        }
        for (const auto& m : true_cov) cov.push_back(&m);
    } else {
        cov.assign(d.h.size(), &s.covariance);
    }

    ReceiverContext ctx;
    ctx.constellation = &s.constellation;
    ctx.pattern = &s.pattern;
    ctx.plan = &s.plan;
    ctx.code = s.code;
    ctx.settings = cfg.receiver_settings;

    BlockOutcome out;
    out.errors.resize(sigma2.size());
    out.eb_sum.assign(sigma2.size(), 0.0);
    out.es_sum.assign(sigma2.size(), 0.0);
    if (keep_llrs) {
        out.llrs.resize(sigma2.size());
        out.bits = d.bits;
    }
    for (std::size_t p = 0; p < sigma2.size(); ++p) {
        BlockObservation obs;
        obs.y = receive(s, d, block, sigma2[p]);
        obs.h = d.h;
        obs.covariance = cov;
        obs.sigma2 = sigma2[p];
        obs.sip = s.sip ? &*s.sip : nullptr;
        for (const auto& h : d.h) {
            out.eb_sum[p] += eb_over_sigma2(h, sigma2[p], s.pattern.rho(), cfg.bits_per_symbol, s.code->rate());
            out.es_sum[p] += es_over_sigma2(h, sigma2[p]);
        }
        for (ReceiverKind kind : cfg.receivers) {
            ReceiverOutput r = run_receiver(kind, ctx, obs);
            std::vector<std::uint32_t> errs;
            for (std::size_t c = 0; c < d.info.size(); ++c) errs.push_back(count_errors(*s.code, d.info[c], r.codewords[c]));
            out.errors[p].push_back(std::move(errs));
            if (keep_llrs) out.llrs[p].push_back(std::move(r.channel_llrs));
        }
    }
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream ss;
    ss << std::setprecision(10) << v;
    return ss.str();
}

}  // namespace

SweepResult run_sweep(const Scenario& s, const SweepOptions& options) {
    const auto& cfg = s.config;
    const std::size_t fpb = s.plan.frames_per_block;
    const std::size_t blocks = (cfg.frames + fpb - 1) / fpb;
    std::vector<double> sigma2;
    for (double p : cfg.snr_points) sigma2.push_back(point_sigma2(s, p));
    const bool dump = options.dump_dir.has_value();

    std::vector<BlockOutcome> outcomes(blocks);
    if (options.workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) outcomes[b] = run_block(s, b, sigma2, dump);
    } else {
        std::exception_ptr failure;
#pragma omp parallel for num_threads(options.workers) schedule(dynamic, 1)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
            try {
                outcomes[static_cast<std::size_t>(b)] = run_block(s, static_cast<std::size_t>(b), sigma2, dump);
            } catch (...) {
#pragma omp critical(ofdmlink_sweep_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    SweepResult result;
    result.frames = blocks * fpb;
    result.info_bits_per_codeword = s.code->dimension();
    for (std::size_t p = 0; p < sigma2.size(); ++p) {
        SweepPoint pt;
        pt.snr_db = cfg.snr_points[p];
        pt.sigma2 = sigma2[p];
        for (ReceiverKind k : cfg.receivers) pt.receivers.push_back(ReceiverPoint{k, {}, {}});
        double eb = 0.0, es = 0.0;
        for (const auto& o : outcomes) {
            eb += o.eb_sum[p];
            es += o.es_sum[p];
            for (std::size_t r = 0; r < cfg.receivers.size(); ++r) {
                for (auto e : o.errors[p][r]) {
                    pt.receivers[r].ber.add_codeword(e, result.info_bits_per_codeword);
                    pt.receivers[r].codeword_errors.push_back(e);
                }
            }
        }
        pt.mean_eb_over_sigma2 = eb / static_cast<double>(result.frames);
        pt.mean_es_over_sigma2 = es / static_cast<double>(result.frames);
        result.points.push_back(std::move(pt));
    }

    if (dump) {
        const auto& dir = *options.dump_dir;
        std::filesystem::create_directories(dir);
        {
            std::ofstream plan_out(dir / "plan.json");
            plan_out << plan_to_json(s.plan, s.pattern).dump(2) << '\n';
        }
        const std::size_t m = cfg.bits_per_symbol;
        std::vector<std::vector<double>> bits;
        for (const auto& o : outcomes) {
            for (const auto& f : o.bits) bits.emplace_back(f.begin(), f.end());
        }
        write_tensor(dir / "bits.tensor", frames_to_tensor(bits, cfg.dims, m));
        for (std::size_t p = 0; p < sigma2.size(); ++p) {
            for (std::size_t r = 0; r < cfg.receivers.size(); ++r) {
                std::vector<std::vector<double>> llrs;
                for (const auto& o : outcomes) {
                    for (const auto& f : o.llrs[p][r]) llrs.push_back(f);
                }
                const auto name = "llrs_p" + std::to_string(p) + "_" + to_string(cfg.receivers[r]) + ".tensor";
                write_tensor(dir / name, frames_to_tensor(llrs, cfg.dims, m));
            }
        }
    }
    return result;
}

bool reportable(const BerAccumulator& ber, const ScenarioConfig& config) {
    return config.force || ber.errors() >= config.min_errors;
}

void write_ber_csv(const SweepResult& r, std::size_t receiver, const ScenarioConfig& config,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "snr_db,ber,ci_low,ci_high\n";
    for (const auto& pt : r.points) {
        const auto& ber = pt.receivers.at(receiver).ber;
        const bool ok = reportable(ber, config);
        const auto ci = ber.interval();
        const double nan = std::nan("");
        out << fmt(pt.snr_db) << ',' << fmt(ok ? ber.ber() : nan) << ',' << fmt(ok ? ci.low : nan) << ','
            << fmt(ok ? ci.high : nan) << '\n';
    }
    if (!out) throw FormatError("write failed for " + path.string());
}

void write_goodput_csv(const SweepResult& r, std::size_t receiver, const Scenario& s,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "snr_db,goodput\n";
    for (const auto& pt : r.points) {
        const auto& ber = pt.receivers.at(receiver).ber;
        const double g = reportable(ber, s.config)
                             ? goodput(s.code->rate(), s.pattern.rho(), s.config.bits_per_symbol,
                                       s.config.dims.size(), ber.ber())
                             : std::nan("");
        out << fmt(pt.snr_db) << ',' << fmt(g) << '\n';
    }
    if (!out) throw FormatError("write failed for " + path.string());
}

Tensor frames_to_tensor(const std::vector<std::vector<double>>& frames, const OfdmDims& dims, std::size_t m) {
    Tensor t;
    t.dtype = DType::f32;
    t.dims = {frames.size(), dims.n_symbols, dims.n_subcarriers, m};
    t.data.reserve(frames.size() * dims.size() * m);
    for (const auto& f : frames) {
        if (f.size() != dims.size() * m) throw DimensionError("frames_to_tensor: frame size mismatch");
        for (double v : f) t.data.push_back(static_cast<float>(v));
    }
    return t;
}

std::vector<LlrFrame> tensor_to_frames(const Tensor& t, const OfdmDims& dims, std::size_t m) {
    if (t.dtype != DType::f32 || t.dims.size() != 4 || t.dims[1] != dims.n_symbols ||
        t.dims[2] != dims.n_subcarriers || t.dims[3] != m) {
        throw FormatError("tensor shape must be f32 [frames, " + std::to_string(dims.n_symbols) + ", " +
                          std::to_string(dims.n_subcarriers) + ", " + std::to_string(m) + "]");
    }
    const std::size_t per = dims.size() * m;
    std::vector<LlrFrame> frames(t.dims[0]);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        frames[f].assign(t.data.begin() + static_cast<std::ptrdiff_t>(f * per),
                         t.data.begin() + static_cast<std::ptrdiff_t>((f + 1) * per));
    }
    return frames;
}

EvalResult eval_llrs(const nlohmann::json& plan_json, const Tensor& llrs, const Tensor& bits, int bp_iterations) {
    const auto [plan, pattern] = plan_from_json(plan_json);
    const LdpcCode& code = ieee80211n_1944_r23();
    if (plan.code_length != code.length()) throw FormatError("eval_llrs: plan code length does not match the code");
    const auto llr_frames = tensor_to_frames(llrs, plan.dims, plan.bits_per_symbol);
    const auto bit_frames = tensor_to_frames(bits, plan.dims, plan.bits_per_symbol);
    if (llr_frames.size() != bit_frames.size()) throw FormatError("eval_llrs: LLR and bit tensors differ in frames");
    const std::size_t fpb = plan.frames_per_block;
    if (llr_frames.size() % fpb != 0) throw FormatError("eval_llrs: frame count is not a whole number of blocks");

    EvalResult r;
    r.frames = llr_frames.size();
    for (std::size_t b = 0; b < llr_frames.size() / fpb; ++b) {
        const auto first = static_cast<std::ptrdiff_t>(b * fpb);
        const std::vector<LlrFrame> block_llrs(llr_frames.begin() + first, llr_frames.begin() + first + fpb);
        const std::vector<LlrFrame> block_bits(bit_frames.begin() + first, bit_frames.begin() + first + fpb);
        const auto decoded = decode_block(code, plan, block_llrs, bp_iterations);
        const auto truth_soft = disassemble(plan, block_bits);
        for (std::size_t c = 0; c < decoded.size(); ++c) {
            std::vector<std::uint8_t> truth(truth_soft[c].size());
            for (std::size_t j = 0; j < truth.size(); ++j) truth[j] = truth_soft[c][j] != 0.0 ? 1 : 0;
            r.ber.add_codeword(count_errors(code, code.extract_info(truth), decoded[c]), code.dimension());
        }
    }
    r.goodput = goodput(code.rate(), pattern.rho(), plan.bits_per_symbol, plan.dims.size(), r.ber.ber());
    return r;
}

void generate_frames(const Scenario& s, double snr_db, std::size_t frames, const std::filesystem::path& out_dir) {
    const auto& cfg = s.config;
    const double sigma2 = point_sigma2(s, snr_db);
    const std::size_t fpb = s.plan.frames_per_block;
    const std::size_t blocks = (frames + fpb - 1) / fpb;
    const std::uint64_t total = blocks * fpb;
    Tensor y{DType::c64, {total, cfg.dims.n_symbols, cfg.dims.n_subcarriers}, {}};
    Tensor h = y;
    std::vector<std::vector<double>> bits;
    auto push = [](Tensor& t, const ComplexGrid& g) {
        for (const auto& v : g.values()) {
            t.data.push_back(static_cast<float>(v.real()));
            t.data.push_back(static_cast<float>(v.imag()));
        }
    };
    for (std::size_t b = 0; b < blocks; ++b) {
        const BlockDraw d = draw_block(s, b);
        const auto rx = receive(s, d, b, sigma2);
        for (std::size_t f = 0; f < fpb; ++f) {
            push(y, rx[f]);
            push(h, d.h[f]);
            bits.emplace_back(d.bits[f].begin(), d.bits[f].end());
        }
    }
    std::filesystem::create_directories(out_dir);
    write_tensor(out_dir / "y.tensor", y);
    write_tensor(out_dir / "h.tensor", h);
    write_tensor(out_dir / "bits.tensor", frames_to_tensor(bits, cfg.dims, cfg.bits_per_symbol));
    std::ofstream(out_dir / "plan.json") << plan_to_json(s.plan, s.pattern).dump(2) << '\n';
    nlohmann::json meta = {{"snr_db", snr_db}, {"sigma2", sigma2}, {"frames", total}, {"config", config_to_json(cfg)}};
    if (s.sip) meta["sip_seed"] = s.sip->seed;
    std::ofstream(out_dir / "meta.json") << meta.dump(2) << '\n';
}

}  // namespace ofdmlink
