#include "ofdmlink/ldpc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ofdmlink/data.hpp"
#include "ofdmlink/error.hpp"

namespace ofdmlink {

namespace {

using Bits = std::vector<std::uint64_t>;

bool get_bit(const Bits& b, std::size_t i) { return ((b[i >> 6] >> (i & 63)) & 1U) != 0; }
void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }

}  // namespace

LdpcCode::LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> checks) : n_(n), checks_(std::move(checks)) {
    if (n_ == 0 || checks_.empty()) throw DomainError("LdpcCode: empty code");
    for (auto& row : checks_) {
        std::sort(row.begin(), row.end());
        if (row.empty()) throw DomainError("LdpcCode: empty check");
        if (std::adjacent_find(row.begin(), row.end()) != row.end()) throw DomainError("LdpcCode: repeated variable");
        if (row.back() >= n_) throw DomainError("LdpcCode: variable index out of range");
    }
    build_edges();
    build_encoder();
}

void LdpcCode::build_edges() {
    check_ptr_.assign(1, 0);
    edge_var_.clear();
    for (const auto& row : checks_) {
        edge_var_.insert(edge_var_.end(), row.begin(), row.end());
        check_ptr_.push_back(static_cast<std::uint32_t>(edge_var_.size()));
    }
}

void LdpcCode::build_encoder() {
    // Reduced row echelon form, pivots taken from the rightmost columns so the
    // 802.11n structure yields a systematic code (info bits first).
    const std::size_t words = (n_ + 63) / 64;
    std::vector<Bits> rows(checks_.size(), Bits(words, 0));
    for (std::size_t r = 0; r < checks_.size(); ++r) {
        for (auto v : checks_[r]) set_bit(rows[r], v);
    }
    std::vector<std::size_t> pivot_col;
    std::vector<bool> is_pivot(n_, false);
    std::size_t rank = 0;
    for (std::size_t col = n_; col-- > 0 && rank < rows.size();) {
        std::size_t sel = rank;
        while (sel < rows.size() && !get_bit(rows[sel], col)) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[rank], rows[sel]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r != rank && get_bit(rows[r], col)) {
                for (std::size_t w = 0; w < words; ++w) rows[r][w] ^= rows[rank][w];
            }
        }
        pivot_col.push_back(col);
        is_pivot[col] = true;
        ++rank;
    }
    info_positions_.clear();
    for (std::size_t c = 0; c < n_; ++c) {
        if (!is_pivot[c]) info_positions_.push_back(static_cast<std::uint32_t>(c));
    }
    std::vector<std::size_t> info_index(n_, 0);
    for (std::size_t j = 0; j < info_positions_.size(); ++j) info_index[info_positions_[j]] = j;

    info_words_ = (info_positions_.size() + 63) / 64;
    parity_positions_.assign(pivot_col.begin(), pivot_col.end());
    generator_.assign(rank, Bits(info_words_, 0));
    for (std::size_t r = 0; r < rank; ++r) {
        for (std::size_t c = 0; c < n_; ++c) {
            if (!is_pivot[c] && get_bit(rows[r], c)) set_bit(generator_[r], info_index[c]);
        }
    }
}

LdpcCode LdpcCode::from_base_matrix(const std::vector<std::vector<int>>& base, std::size_t lifting) {
    if (base.empty() || lifting == 0) throw DomainError("from_base_matrix: empty base matrix");
    const std::size_t cols = base.front().size();
    std::vector<std::vector<std::uint32_t>> checks(base.size() * lifting);
    for (std::size_t r = 0; r < base.size(); ++r) {
        if (base[r].size() != cols) throw FormatError("from_base_matrix: ragged base matrix");
        for (std::size_t c = 0; c < cols; ++c) {
            const int shift = base[r][c];
            if (shift < 0) continue;
            if (static_cast<std::size_t>(shift) >= lifting) throw FormatError("from_base_matrix: shift >= lifting");
            for (std::size_t i = 0; i < lifting; ++i) {
                checks[r * lifting + i].push_back(
                    static_cast<std::uint32_t>(c * lifting + (i + static_cast<std::size_t>(shift)) % lifting));
            }
        }
    }
    return LdpcCode(cols * lifting, std::move(checks));
}

LdpcCode LdpcCode::from_base_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open base matrix " + path.string());
    std::size_t lifting = 0;
    std::vector<std::vector<int>> base;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        if (line.rfind("lifting", 0) == 0) {
            std::string key;
            ss >> key >> lifting;
            continue;
        }
        std::vector<int> row;
        int v = 0;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) base.push_back(std::move(row));
    }
    if (lifting == 0) throw FormatError("base matrix file lacks a 'lifting' line: " + path.string());
    return from_base_matrix(base, lifting);
}

LdpcCode LdpcCode::from_alist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open alist " + path.string());
    std::size_t n = 0, m = 0, max_col = 0, max_row = 0;
    if (!(in >> n >> m >> max_col >> max_row)) throw FormatError("alist: bad header");
    std::vector<std::size_t> col_w(n), row_w(m);
    for (auto& w : col_w) in >> w;
    for (auto& w : row_w) in >> w;
    // Column lists first (validated against the row lists), then row lists.
    std::vector<std::vector<std::uint32_t>> cols(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t j = 0; j < max_col; ++j) {
            std::size_t v = 0;
            in >> v;
            if (v != 0) cols[c].push_back(static_cast<std::uint32_t>(v - 1));
        }
    }
    std::vector<std::vector<std::uint32_t>> checks(m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < max_row; ++j) {
            std::size_t v = 0;
            in >> v;
            if (v != 0) checks[r].push_back(static_cast<std::uint32_t>(v - 1));
        }
    }
    if (!in) throw FormatError("alist: truncated file " + path.string());
    std::size_t edges_c = 0, edges_r = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (cols[c].size() != col_w[c]) throw FormatError("alist: column weight mismatch");
        edges_c += cols[c].size();
        for (auto r : cols[c]) {
            if (r >= m || std::find(checks[r].begin(), checks[r].end(), c) == checks[r].end()) {
                throw FormatError("alist: column and row lists disagree");
            }
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        if (checks[r].size() != row_w[r]) throw FormatError("alist: row weight mismatch");
        edges_r += checks[r].size();
    }
    if (edges_c != edges_r) throw FormatError("alist: edge counts disagree");
    return LdpcCode(n, std::move(checks));
}

void LdpcCode::save_alist(const std::filesystem::path& path) const {
    std::vector<std::vector<std::uint32_t>> cols(n_);
    for (std::size_t r = 0; r < checks_.size(); ++r) {
        for (auto v : checks_[r]) cols[v].push_back(static_cast<std::uint32_t>(r));
    }
    std::size_t max_col = 0, max_row = 0;
    for (const auto& c : cols) max_col = std::max(max_col, c.size());
    for (const auto& r : checks_) max_row = std::max(max_row, r.size());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write alist " + path.string());
    out << n_ << ' ' << checks_.size() << '\n' << max_col << ' ' << max_row << '\n';
    for (std::size_t c = 0; c < n_; ++c) out << cols[c].size() << (c + 1 < n_ ? ' ' : '\n');
    for (std::size_t r = 0; r < checks_.size(); ++r) out << checks_[r].size() << (r + 1 < checks_.size() ? ' ' : '\n');
    auto write_lists = [&out](const std::vector<std::vector<std::uint32_t>>& lists, std::size_t width) {
        for (const auto& l : lists) {
            for (std::size_t j = 0; j < width; ++j) {
                out << (j < l.size() ? l[j] + 1 : 0) << (j + 1 < width ? ' ' : '\n');
            }
        }
    };
    write_lists(cols, max_col);
    write_lists(checks_, max_row);
}

std::vector<std::uint8_t> LdpcCode::encode(std::span<const std::uint8_t> info) const {
    if (info.size() != dimension()) {
        throw DimensionError("LdpcCode::encode: expected " + std::to_string(dimension()) + " info bits, got " +
                             std::to_string(info.size()));
    }
    Bits packed(info_words_, 0);
    for (std::size_t j = 0; j < info.size(); ++j) {
        if (info[j] & 1U) set_bit(packed, j);
    }
    std::vector<std::uint8_t> cw(n_, 0);
    for (std::size_t j = 0; j < info_positions_.size(); ++j) cw[info_positions_[j]] = info[j] & 1U;
    for (std::size_t r = 0; r < generator_.size(); ++r) {
        int parity = 0;
        for (std::size_t w = 0; w < info_words_; ++w) parity ^= std::popcount(generator_[r][w] & packed[w]) & 1;
        cw[parity_positions_[r]] = static_cast<std::uint8_t>(parity);
    }
    return cw;
}

bool LdpcCode::is_codeword(std::span<const std::uint8_t> bits) const {
    if (bits.size() != n_) throw DimensionError("LdpcCode::is_codeword: length mismatch");
    for (const auto& row : checks_) {
        unsigned acc = 0;
        for (auto v : row) acc ^= bits[v] & 1U;
        if (acc != 0) return false;
    }
    return true;
}

std::vector<std::uint8_t> LdpcCode::extract_info(std::span<const std::uint8_t> codeword) const {
    if (codeword.size() != n_) throw DimensionError("LdpcCode::extract_info: length mismatch");
    std::vector<std::uint8_t> info(info_positions_.size());
    for (std::size_t j = 0; j < info.size(); ++j) info[j] = codeword[info_positions_[j]];
    return info;
}

const LdpcCode& ieee80211n_1944_r23() {
    static const LdpcCode code =
        LdpcCode::from_base_matrix_file(data_directory() / "ldpc" / "ieee80211n_1944_r23.txt");
    return code;
}

LdpcCode toy_tree_code() {
    // Checks 0..10 chain variables (2j, 2j+1, 2j+2); check 11 hangs (22, 23) off the end.
    std::vector<std::vector<std::uint32_t>> checks;
    for (std::uint32_t j = 0; j < 11; ++j) checks.push_back({2 * j, 2 * j + 1, 2 * j + 2});
    checks.push_back({22, 23});
    return LdpcCode(24, std::move(checks));
}

DecodeResult decode(const LdpcCode& code, std::span<const double> channel_llrs, const DecodeOptions& options,
                    std::span<const double> prior_llrs) {
    const std::size_t n = code.length();
    if (channel_llrs.size() != n) throw DimensionError("decode: channel LLR length mismatch");
    if (!prior_llrs.empty() && prior_llrs.size() != n) throw DimensionError("decode: prior LLR length mismatch");

    auto clamp = [](double x) { return std::clamp(x, -kLlrClamp, kLlrClamp); };
    // Internally lambda = ln P(0)/P(1), the orientation of the usual tanh rule.
    std::vector<double> intrinsic(n);
    for (std::size_t v = 0; v < n; ++v) {
        const double in = std::isfinite(channel_llrs[v]) ? clamp(channel_llrs[v]) : 0.0;
        const double pr = prior_llrs.empty() ? 0.0 : (std::isfinite(prior_llrs[v]) ? clamp(prior_llrs[v]) : 0.0);
        intrinsic[v] = -(in + pr);
    }

    const auto& ptr = code.check_offsets();
    const auto& evar = code.edge_variables();
    const std::size_t edges = evar.size();
    std::vector<double> c2v(edges, 0.0);
    std::vector<double> tanh_buf;
    std::vector<double> total = intrinsic;

    DecodeResult result;
    result.hard_bits.assign(n, 0);
    auto decide = [&] {
        for (std::size_t v = 0; v < n; ++v) result.hard_bits[v] = total[v] < 0.0 ? 1 : 0;
        return code.is_codeword(result.hard_bits);
    };

    result.converged = decide();
    int iter = 0;
    while (iter < options.max_iterations && !(options.early_exit && result.converged)) {
        ++iter;
        for (std::size_t r = 0; r + 1 < ptr.size(); ++r) {
            const std::uint32_t b = ptr[r];
            const std::uint32_t e = ptr[r + 1];
            const std::size_t deg = e - b;
            tanh_buf.resize(deg);
            for (std::size_t i = 0; i < deg; ++i) tanh_buf[i] = std::tanh(0.5 * clamp(total[evar[b + i]] - c2v[b + i]));
            // Leave-one-out products via prefix/suffix scans (no division by zero).
            double prefix = 1.0;
            for (std::size_t i = 0; i < deg; ++i) {
                c2v[b + i] = prefix;
                prefix *= tanh_buf[i];
            }
            double suffix = 1.0;
            for (std::size_t i = deg; i-- > 0;) {
                const double p = std::clamp(c2v[b + i] * suffix, -1.0 + 1e-16, 1.0 - 1e-16);
                c2v[b + i] = clamp(2.0 * std::atanh(p));
                suffix *= tanh_buf[i];
            }
        }
        total = intrinsic;
        for (std::size_t ed = 0; ed < edges; ++ed) total[evar[ed]] += c2v[ed];
        result.converged = decide();
    }
    result.iterations_used = iter;
    result.output_llrs.resize(n);
    for (std::size_t v = 0; v < n; ++v) result.output_llrs[v] = -total[v];
    return result;
}

}  // namespace ofdmlink
