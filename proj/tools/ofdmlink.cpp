#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ofdmlink/config.hpp"
#include "ofdmlink/error.hpp"
#include "ofdmlink/harness.hpp"
#include "ofdmlink/metrics.hpp"
#include "ofdmlink/modem.hpp"
#include "ofdmlink/tensor.hpp"

namespace fs = std::filesystem;
using namespace ofdmlink;

namespace {

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw FormatError("cannot open " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

/// out.csv -> out.<tag>.csv
fs::path tagged(const fs::path& base, const std::string& tag) {
    fs::path p = base;
    p.replace_filename(base.stem().string() + "." + tag + base.extension().string());
    return p;
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> min_errors;
    std::optional<std::size_t> frames;
    bool force = false;
    int workers = 1;
    std::string dump_llrs;
};

int simulate(const SimulateArgs& a) {
    ScenarioConfig cfg = load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.min_errors) cfg.min_errors = *a.min_errors;
    if (a.frames) cfg.frames = *a.frames;
    if (a.force) cfg.force = true;
    const Scenario s = prepare_scenario(cfg, a.workers);
    SweepOptions opt;
    opt.workers = a.workers;
    if (!a.dump_llrs.empty()) opt.dump_dir = fs::path(a.dump_llrs);
    const SweepResult r = run_sweep(s, opt);

    const fs::path out(a.out);
    for (std::size_t i = 0; i < cfg.receivers.size(); ++i) {
        const fs::path ber = cfg.receivers.size() == 1 ? out : tagged(out, to_string(cfg.receivers[i]));
        write_ber_csv(r, i, cfg, ber);
        write_goodput_csv(r, i, s, tagged(ber, "goodput"));
        std::cerr << to_string(cfg.receivers[i]) << " -> " << ber.string() << '\n';
    }
    for (const auto& pt : r.points) {
        for (std::size_t i = 0; i < pt.receivers.size(); ++i) {
            const auto& b = pt.receivers[i].ber;
            if (!reportable(b, cfg)) {
                std::cerr << "note: " << to_string(pt.receivers[i].kind) << " at " << pt.snr_db << " dB has "
                          << b.errors() << " errors (< " << cfg.min_errors << "); written as nan, use --force\n";
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM link-level simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run an Eb/sigma2 sweep and write BER and goodput CSVs");
    c_sim->add_option("config", sim.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    c_sim->add_option("-o,--output", sim.out, "BER CSV (one file per receiver when several)")->required();
    c_sim->add_option("--seed", sim.seed, "Master seed override");
    c_sim->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
    c_sim->add_option("--min-errors", sim.min_errors, "Errors needed to report a point");
    c_sim->add_option("--frames", sim.frames, "Frames per point override");
    c_sim->add_flag("--force", sim.force, "Report points below --min-errors");
    c_sim->add_option("--dump-llrs", sim.dump_llrs, "Directory for LLR, bit and plan dumps");

    std::string corr_config, corr_out;
    std::optional<std::size_t> corr_samples;
    std::optional<std::uint64_t> corr_seed;
    int corr_workers = 1;
    auto* c_corr = app.add_subcommand("estimate-corr", "Estimate the receiver covariance and save it as a tensor");
    c_corr->add_option("config", corr_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    c_corr->add_option("-o,--output", corr_out, "Tensor file")->required();
    c_corr->add_option("--samples", corr_samples, "Channel samples");
    c_corr->add_option("--seed", corr_seed, "Sampling seed");
    c_corr->add_option("--workers", corr_workers, "Worker threads")->check(CLI::PositiveNumber);

    std::size_t papr_m = 6, papr_ns = 72, papr_symbols = 1'000'000, papr_os = 1;
    std::uint64_t papr_seed = 1;
    std::string papr_const, papr_sip, papr_out;
    double papr_step = 0.05, papr_max = 14.0;
    auto* c_papr = app.add_subcommand("papr", "PAPR CDF of random OFDM symbols");
    c_papr->add_option("--bits-per-symbol", papr_m, "QAM order when no constellation file is given");
    c_papr->add_option("--constellation", papr_const, "Constellation CSV")->check(CLI::ExistingFile);
    c_papr->add_option("--sip", papr_sip, "SIP allocation CSV")->check(CLI::ExistingFile);
    c_papr->add_option("--n-subcarriers", papr_ns, "Subcarriers per OFDM symbol");
    c_papr->add_option("--symbols", papr_symbols, "OFDM symbols");
    c_papr->add_option("--oversampling", papr_os, "IDFT oversampling factor");
    c_papr->add_option("--seed", papr_seed, "Seed");
    c_papr->add_option("--step-db", papr_step, "CDF grid step");
    c_papr->add_option("--max-db", papr_max, "CDF grid upper end");
    c_papr->add_option("-o,--output", papr_out, "CSV papr_db,cdf")->required();

    std::string rate_llrs, rate_bits, rate_plan;
    auto* c_rate = app.add_subcommand("rate", "Total BCE and achievable rate from LLRs");
    c_rate->add_option("--llrs", rate_llrs, "LLR tensor")->required()->check(CLI::ExistingFile);
    c_rate->add_option("--bits", rate_bits, "Bit tensor")->required()->check(CLI::ExistingFile);
    c_rate->add_option("--plan", rate_plan, "Plan JSON")->required()->check(CLI::ExistingFile);

    std::string ev_llrs, ev_bits, ev_plan;
    int ev_iters = 40;
    auto* c_eval = app.add_subcommand("eval-llrs", "Decode an LLR tensor and report BER and goodput");
    c_eval->add_option("llrs", ev_llrs, "LLR tensor [frames, n_T, n_S, m]")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--bits", ev_bits, "Transmitted bit tensor")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--plan", ev_plan, "Plan JSON")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--iterations", ev_iters, "BP iterations")->check(CLI::PositiveNumber);

    std::string gen_config, gen_out;
    double gen_snr = 0.0;
    std::size_t gen_frames = 100;
    std::optional<std::uint64_t> gen_seed;
    auto* c_gen = app.add_subcommand("gen-frames", "Write received grids, channels and bits for one point");
    c_gen->add_option("config", gen_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    c_gen->add_option("--snr-db", gen_snr, "Point on the configured SNR axis")->required();
    c_gen->add_option("--frames", gen_frames, "Frames");
    c_gen->add_option("--seed", gen_seed, "Master seed override");
    c_gen->add_option("-o,--output", gen_out, "Output directory")->required();

    std::string eq_config, eq_out;
    double eq_snr = 100.0;
    std::size_t eq_block = 0;
    auto* c_eq = app.add_subcommand("equalize", "Dump y / h_hat of one frame (LMMSE estimate)");
    c_eq->add_option("config", eq_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    c_eq->add_option("--snr-db", eq_snr, "Point on the configured SNR axis");
    c_eq->add_option("--block", eq_block, "Block index");
    c_eq->add_option("-o,--output", eq_out, "CSV subcarrier,symbol,pilot,re,im")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_sim) return simulate(sim);

        if (*c_corr) {
            ScenarioConfig cfg = load_config(corr_config);
            if (corr_samples) cfg.covariance.samples = *corr_samples;
            if (corr_seed) cfg.covariance.seed = *corr_seed;
            cfg.validate();
            write_tensor(corr_out,
                         matrix_to_tensor(estimate_correlation(cfg.dims, cfg.radio(), cfg.covariance, corr_workers)));
            return 0;
        }

        if (*c_papr) {
            const Constellation c = papr_const.empty() ? gray_qam(papr_m) : load_constellation(papr_const);
            std::optional<SipAllocation> sip;
            PaprOptions opt;
            opt.n_subcarriers = papr_ns;
            opt.symbols = papr_symbols;
            opt.seed = papr_seed;
            opt.oversampling = papr_os;
            if (!papr_sip.empty()) {
                // The allocation file fixes n_S; n_T is read from its rows.
                std::ifstream in(papr_sip);
                std::string line;
                std::size_t max_k = 0, rows = 0;
                std::getline(in, line);
                std::getline(in, line);
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    const auto a = line.find(','), b = line.find(',', a + 1);
                    max_k = std::max(max_k, static_cast<std::size_t>(std::stoul(line.substr(a + 1, b - a - 1))));
                    ++rows;
                }
                const std::size_t nt = max_k + 1;
                if (rows % nt != 0) throw FormatError("papr: SIP allocation is not a full grid");
                sip = load_sip_allocation(papr_sip, OfdmDims(rows / nt, nt));
                opt.n_subcarriers = rows / nt;
                opt.sip = &*sip;
            }
            const auto samples = papr_samples(c, opt);
            std::vector<double> grid;
            for (double g = 0.0; g <= papr_max + 1e-9; g += papr_step) grid.push_back(g);
            const CdfTable cdf = empirical_cdf(samples, grid);
            std::ofstream out(papr_out);
            if (!out) throw FormatError("cannot write " + papr_out);
            out << "papr_db,cdf\n" << std::setprecision(10);
            for (std::size_t i = 0; i < grid.size(); ++i) out << cdf.papr_db[i] << ',' << cdf.cdf[i] << '\n';
            return 0;
        }

        if (*c_rate) {
            const auto [plan, pattern] = plan_from_json(read_json(rate_plan));
            const auto llrs = tensor_to_frames(read_tensor(rate_llrs), plan.dims, plan.bits_per_symbol);
            const auto bits = tensor_to_frames(read_tensor(rate_bits), plan.dims, plan.bits_per_symbol);
            if (llrs.size() != bits.size()) throw FormatError("rate: LLR and bit tensors differ in frames");
            std::vector<double> l;
            std::vector<std::uint8_t> b;
            const std::size_t m = plan.bits_per_symbol;
            for (std::size_t f = 0; f < llrs.size(); ++f) {
                for (std::size_t k : pattern.data_indices()) {
                    for (std::size_t i = 0; i < m; ++i) {
                        l.push_back(llrs[f][k * m + i]);
                        b.push_back(bits[f][k * m + i] != 0.0 ? 1 : 0);
                    }
                }
            }
            const RateEstimate r = estimate_rate_from_llrs(l, b, pattern.data_count() * m);
            nlohmann::json j = {{"bce_total", r.bce_total}, {"rate", r.rate},
                                {"bits_per_frame", r.bits_per_frame}, {"frames", r.samples},
                                {"clamped", r.clamped}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*c_eval) {
            const EvalResult r = eval_llrs(read_json(ev_plan), read_tensor(ev_llrs), read_tensor(ev_bits), ev_iters);
            const auto ci = r.ber.interval();
            std::cout << "ber,ci_low,ci_high,errors,bits,goodput\n"
                      << std::setprecision(10) << r.ber.ber() << ',' << ci.low << ',' << ci.high << ','
                      << r.ber.errors() << ',' << r.ber.bits() << ',' << r.goodput << '\n';
            return 0;
        }

        if (*c_gen) {
            ScenarioConfig cfg = load_config(gen_config);
            if (gen_seed) cfg.seed = *gen_seed;
            generate_frames(prepare_scenario(cfg), gen_snr, gen_frames, gen_out);
            return 0;
        }

        if (*c_eq) {
            ScenarioConfig cfg = load_config(eq_config);
            cfg.receivers = {ReceiverKind::non_iterative};
            cfg.validate();
            const Scenario s = prepare_scenario(cfg);
            const fs::path tmp = fs::temp_directory_path() / ("ofdmlink_equalize_" + std::to_string(::getpid()));
            generate_frames(s, eq_snr, (eq_block + 1) * s.plan.frames_per_block, tmp);
            const Tensor y = read_tensor(tmp / "y.tensor");
            fs::remove_all(tmp);
            const std::size_t n = cfg.dims.size();
            const std::size_t frame = eq_block * s.plan.frames_per_block;
            ComplexGrid yg(cfg.dims);
            for (std::size_t k = 0; k < n; ++k) {
                yg[k] = {y.data[2 * (frame * n + k)], y.data[2 * (frame * n + k) + 1]};
            }
            const auto est = lmmse_estimate(s.covariance, s.pattern, yg, point_sigma2(s, eq_snr));
            std::ofstream out(eq_out);
            out << "subcarrier,symbol,pilot,re,im\n" << std::setprecision(10);
            for (std::size_t k = 0; k < n; ++k) {
                const cplx z = yg[k] / est.h_hat[k];
                out << cfg.dims.subcarrier_of(k) << ',' << cfg.dims.symbol_of(k) << ','
                    << (s.pattern.is_pilot(k) ? 1 : 0) << ',' << z.real() << ',' << z.imag() << '\n';
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
