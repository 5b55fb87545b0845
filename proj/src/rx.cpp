#include "ofdmlink/rx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ofdmlink/error.hpp"

namespace ofdmlink {

namespace {

double clamp_llr(double x) { return std::clamp(x, -kLlrClamp, kLlrClamp); }

void require_covariance(const Eigen::MatrixXcd& r, const OfdmDims& dims, const char* what) {
    const auto n = static_cast<Eigen::Index>(dims.size());
    if (r.rows() != n || r.cols() != n) {
        throw DimensionError(std::string(what) + ": covariance is " + std::to_string(r.rows()) + "x" +
                             std::to_string(r.cols()) + ", grid needs " + std::to_string(n));
    }
}

/// LSE over label subsets of metric[u] = -|y - h c_u|^2 / s2 + sum_l c_u^(l) prior[l].
/// `total` receives the exact values; callers clamp.
void demap_re(const Constellation& c, cplx y, cplx h, double s2, const double* prior, double* total,
              std::vector<double>& metric) {
    const std::size_t m = c.bits_per_symbol();
    const std::size_t M = c.size();
    metric.resize(M);
    const double inv = 1.0 / s2;
    for (std::size_t u = 0; u < M; ++u) {
        double v = -std::norm(y - h * c.point(u)) * inv;
        if (prior != nullptr) {
            for (std::size_t l = 0; l < m; ++l) {
                if (c.bit(u, l)) v += prior[l];
            }
        }
        metric[u] = v;
    }
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double max1 = kNegInf, max0 = kNegInf;
        for (std::size_t u = 0; u < M; ++u) {
            if (c.bit(u, i)) {
                max1 = std::max(max1, metric[u]);
            } else {
                max0 = std::max(max0, metric[u]);
            }
        }
        double s1 = 0.0, s0 = 0.0;
        for (std::size_t u = 0; u < M; ++u) {
            if (c.bit(u, i)) {
                s1 += std::exp(metric[u] - max1);
            } else {
                s0 += std::exp(metric[u] - max0);
            }
        }
        total[i] = (max1 + std::log(s1)) - (max0 + std::log(s0));
    }
}

double effective_noise(const ChannelEstimate& est, std::size_t re, double sigma2) {
    const double s2 = est.err_var[re] + sigma2;
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw NumericalError("demapper: effective noise variance is not positive");
    return s2;
}

void check_demap_inputs(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est,
                        const PilotPattern& pattern) {
    if (c.bits_per_symbol() == 0) throw DomainError("demapper: empty constellation");
    require_same_dims(y, est.h_hat, "demapper");
    require_same_dims(y, est.err_var, "demapper");
    if (!(y.dims() == pattern.dims())) throw DimensionError("demapper: pilot pattern dims differ from Y");
}

}  // namespace

ChannelEstimate perfect_estimate(const ComplexGrid& h) {
    return ChannelEstimate{h, ResourceGrid<double>(h.dims(), 0.0), std::nullopt};
}

ChannelEstimate lmmse_estimate(const Eigen::MatrixXcd& covariance, const PilotPattern& pattern, const ComplexGrid& y,
                               double sigma2, bool keep_full) {
    const auto& dims = pattern.dims();
    require_covariance(covariance, dims, "lmmse_estimate");
    if (!(y.dims() == dims)) throw DimensionError("lmmse_estimate: Y dims differ from the pilot pattern");
    if (!(sigma2 >= 0.0)) throw DomainError("lmmse_estimate: negative noise variance");
    const auto& pilots = pattern.pilot_indices();
    if (pilots.empty()) throw DomainError("lmmse_estimate: pattern has no pilots");

    const auto n = static_cast<Eigen::Index>(dims.size());
    const auto np = static_cast<Eigen::Index>(pilots.size());
    Eigen::VectorXcd p(np), yp(np);
    for (Eigen::Index a = 0; a < np; ++a) {
        p(a) = pattern.values()[pilots[a]];
        yp(a) = y[pilots[a]];
    }
    // A = Pi (diag(p) R diag(p)^H + sigma2 I) Pi^H, G = R diag(p)^H Pi^H.
    Eigen::MatrixXcd a_mat(np, np);
    Eigen::MatrixXcd g(n, np);
    for (Eigen::Index b = 0; b < np; ++b) {
        const auto cb = static_cast<Eigen::Index>(pilots[b]);
        for (Eigen::Index a = 0; a < np; ++a) {
            a_mat(a, b) = p(a) * covariance(static_cast<Eigen::Index>(pilots[a]), cb) * std::conj(p(b));
        }
        a_mat(b, b) += sigma2;
        g.col(b) = covariance.col(cb) * std::conj(p(b));
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(a_mat);
    if (llt.info() != Eigen::Success) throw NumericalError("lmmse_estimate: pilot system is not positive definite");

    const Eigen::VectorXcd h_hat = g * llt.solve(yp);
    const Eigen::MatrixXcd z = llt.matrixL().solve(g.adjoint());

    ChannelEstimate est{ComplexGrid(dims), ResourceGrid<double>(dims, 0.0), std::nullopt};
    for (Eigen::Index k = 0; k < n; ++k) {
        est.h_hat[static_cast<std::size_t>(k)] = h_hat(k);
        est.err_var[static_cast<std::size_t>(k)] = std::max(0.0, covariance(k, k).real() - z.col(k).squaredNorm());
    }
    if (keep_full) est.err_cov = covariance - z.adjoint() * z;
    return est;
}

LlrGrid make_llr_grid(const PilotPattern& pattern, std::size_t m, LlrRole role) {
    LlrGrid g;
    g.dims = pattern.dims();
    g.m = m;
    g.role = role;
    g.values.assign(g.dims.size() * m, 0.0);
    g.mask.assign(g.dims.size(), 0);
    for (std::size_t k : pattern.data_indices()) g.mask[k] = 1;
    return g;
}

LlrGrid llr_grid_from_frame(const PilotPattern& pattern, std::size_t m, LlrRole role, LlrFrame values) {
    LlrGrid g = make_llr_grid(pattern, m, role);
    if (values.size() != g.values.size()) throw DimensionError("llr_grid_from_frame: frame size mismatch");
    for (std::size_t k : pattern.pilot_indices()) {
        for (std::size_t i = 0; i < m; ++i) {
            if (values[k * m + i] != 0.0) throw DomainError("llr_grid_from_frame: LLR present at a pilot RE");
        }
    }
    g.values = std::move(values);
    return g;
}

LlrGrid gaussian_demap(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est, double sigma2,
                       const PilotPattern& pattern) {
    check_demap_inputs(c, y, est, pattern);
    const std::size_t m = c.bits_per_symbol();
    LlrGrid out = make_llr_grid(pattern, m, LlrRole::demapper_total);
    std::vector<double> metric;
    for (std::size_t k : pattern.data_indices()) {
        double* dst = &out.values[k * m];
        demap_re(c, y[k], est.h_hat[k], effective_noise(est, k, sigma2), nullptr, dst, metric);
        for (std::size_t i = 0; i < m; ++i) dst[i] = clamp_llr(dst[i]);
    }
    return out;
}

LlrGrid gaussian_demap_parallel(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est,
                                double sigma2, const PilotPattern& pattern) {
    check_demap_inputs(c, y, est, pattern);
    const std::size_t m = c.bits_per_symbol();
    LlrGrid out = make_llr_grid(pattern, m, LlrRole::demapper_total);
    const auto& data = pattern.data_indices();
    for (std::size_t k : data) effective_noise(est, k, sigma2);
    const auto count = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel
    {
        std::vector<double> metric;
#pragma omp for schedule(static)
        for (std::ptrdiff_t j = 0; j < count; ++j) {
            const std::size_t k = data[static_cast<std::size_t>(j)];
            double* dst = &out.values[k * m];
            demap_re(c, y[k], est.h_hat[k], est.err_var[k] + sigma2, nullptr, dst, metric);
            for (std::size_t i = 0; i < m; ++i) dst[i] = clamp_llr(dst[i]);
        }
    }
    return out;
}

SymbolPrior prior_from_llrs(const Constellation& c, const LlrGrid& prior_llrs, const PilotPattern& pattern) {
    const std::size_t m = c.bits_per_symbol();
    if (prior_llrs.m != m) throw DimensionError("prior_from_llrs: LLR grid has the wrong bits per symbol");
    if (!(prior_llrs.dims == pattern.dims())) throw DimensionError("prior_from_llrs: grid dims differ from pattern");
    const std::size_t n = pattern.dims().size();
    const std::size_t M = c.size();
    SymbolPrior prior;
    prior.m = m;
    prior.probs.assign(n * M, 0.0);
    prior.deterministic.assign(n, 0);
    prior.mean.assign(n, cplx{});
    prior.energy.assign(n, 0.0);
    for (std::size_t k : pattern.pilot_indices()) {
        prior.deterministic[k] = 1;
        prior.mean[k] = pattern.values()[k];
        prior.energy[k] = std::norm(pattern.values()[k]);
    }
    std::vector<double> logit(M);
    for (std::size_t k : pattern.data_indices()) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < M; ++u) {
            double v = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (c.bit(u, i)) v += clamp_llr(prior_llrs.at(k, i));
            }
            logit[u] = v;
            top = std::max(top, v);
        }
        double z = 0.0;
        for (std::size_t u = 0; u < M; ++u) {
            logit[u] = std::exp(logit[u] - top);
            z += logit[u];
        }
        cplx mean{};
        double energy = 0.0;
        double* pk = &prior.probs[k * M];
        for (std::size_t u = 0; u < M; ++u) {
            pk[u] = logit[u] / z;
            mean += pk[u] * c.point(u);
            energy += pk[u] * std::norm(c.point(u));
        }
        prior.mean[k] = mean;
        prior.energy[k] = energy;
    }
    return prior;
}

ChannelEstimate data_aided_estimate(const Eigen::MatrixXcd& covariance, const ComplexGrid& y,
                                    const SymbolPrior& prior, double sigma2, bool keep_full) {
    const auto& dims = y.dims();
    require_covariance(covariance, dims, "data_aided_estimate");
    if (prior.size() != dims.size()) throw DimensionError("data_aided_estimate: prior size differs from Y");
    if (!(sigma2 >= 0.0)) throw DomainError("data_aided_estimate: negative noise variance");
    const auto n = static_cast<Eigen::Index>(dims.size());

    Eigen::VectorXcd xbar(n), yv(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        xbar(k) = prior.mean[static_cast<std::size_t>(k)];
        yv(k) = y[static_cast<std::size_t>(k)];
    }
    // M = R o E{x x^H} + sigma2 I, with E{|x_k|^2} on the diagonal.
    Eigen::MatrixXcd mm = covariance.cwiseProduct(xbar * xbar.adjoint());
    for (Eigen::Index k = 0; k < n; ++k) {
        mm(k, k) = covariance(k, k) * prior.energy[static_cast<std::size_t>(k)] + sigma2;
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(mm);
    if (llt.info() != Eigen::Success) throw NumericalError("data_aided_estimate: system is not positive definite");

    const Eigen::VectorXcd h_hat = covariance * xbar.conjugate().cwiseProduct(llt.solve(yv));
    const Eigen::MatrixXcd g = xbar.asDiagonal() * covariance;
    const Eigen::MatrixXcd z = llt.matrixL().solve(g);

    ChannelEstimate est{ComplexGrid(dims), ResourceGrid<double>(dims, 0.0), std::nullopt};
    for (Eigen::Index k = 0; k < n; ++k) {
        est.h_hat[static_cast<std::size_t>(k)] = h_hat(k);
        est.err_var[static_cast<std::size_t>(k)] = std::max(0.0, covariance(k, k).real() - z.col(k).squaredNorm());
    }
    if (keep_full) est.err_cov = covariance - z.adjoint() * z;
    return est;
}

IeddLlrs iedd_demap(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est, double sigma2,
                    const LlrGrid& prior_llrs) {
    const std::size_t m = c.bits_per_symbol();
    if (prior_llrs.m != m || !(prior_llrs.dims == y.dims())) throw DimensionError("iedd_demap: prior grid shape");
    require_same_dims(y, est.h_hat, "iedd_demap");
    require_same_dims(y, est.err_var, "iedd_demap");
    IeddLlrs out;
    out.total = prior_llrs;
    out.total.role = LlrRole::demapper_total;
    std::fill(out.total.values.begin(), out.total.values.end(), 0.0);
    out.extrinsic = out.total;
    out.extrinsic.role = LlrRole::demapper_extrinsic;

    std::vector<double> metric, prior(m), total(m);
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!prior_llrs.mask[k]) continue;
        for (std::size_t i = 0; i < m; ++i) prior[i] = clamp_llr(prior_llrs.at(k, i));
        demap_re(c, y[k], est.h_hat[k], effective_noise(est, k, sigma2), prior.data(), total.data(), metric);
        for (std::size_t i = 0; i < m; ++i) {
            out.total.at(k, i) = clamp_llr(total[i]);
            out.extrinsic.at(k, i) = clamp_llr(total[i] - prior[i]);
        }
    }
    return out;
}

std::pair<ComplexGrid, ComplexGrid> sip_strip_pilot(const ComplexGrid& y, const ComplexGrid& h,
                                                    const SipAllocation& alloc) {
    require_same_dims(y, h, "sip_strip_pilot");
    require_same_dims(y, alloc.fraction, "sip_strip_pilot");
    ComplexGrid y_data(y.dims());
    ComplexGrid h_eff(y.dims());
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double a = alloc.fraction[k];
        y_data[k] = y[k] - h[k] * std::sqrt(a) * alloc.pilot[k];
        h_eff[k] = h[k] * std::sqrt(1.0 - a);
    }
    return {std::move(y_data), std::move(h_eff)};
}

ReceiverKind parse_receiver_kind(const std::string& name) {
    if (name == "perfect_csi") return ReceiverKind::perfect_csi;
    if (name == "non_iterative") return ReceiverKind::non_iterative;
    if (name == "iedd") return ReceiverKind::iedd;
    throw ConfigError("unknown receiver kind '" + name + "' (expected perfect_csi, non_iterative or iedd)");
}

std::string to_string(ReceiverKind kind) {
    switch (kind) {
        case ReceiverKind::perfect_csi: return "perfect_csi";
        case ReceiverKind::non_iterative: return "non_iterative";
        case ReceiverKind::iedd: return "iedd";
    }
    return "unknown";
}

void round_to_decoder_precision(LlrFrame& llrs) {
    for (double& v : llrs) v = static_cast<double>(static_cast<float>(v));
}

std::vector<std::vector<std::uint8_t>> decode_block(const LdpcCode& code, const FramePlan& plan,
                                                    const std::vector<LlrFrame>& llrs, int bp_iterations) {
    std::vector<LlrFrame> rounded = llrs;
    for (auto& f : rounded) round_to_decoder_precision(f);
    const auto inputs = disassemble(plan, rounded);
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(decode(code, in, DecodeOptions{bp_iterations, true}).hard_bits);
    return out;
}

namespace {

void check_context(const ReceiverContext& ctx, const BlockObservation& obs) {
    if (!ctx.constellation || !ctx.pattern || !ctx.plan || !ctx.code) {
        throw ConfigError("run_receiver: incomplete receiver context");
    }
    const std::size_t frames = ctx.plan->frames_per_block;
    if (obs.y.size() != frames) throw DimensionError("run_receiver: wrong number of received frames");
    if (ctx.plan->code_length != ctx.code->length()) throw DimensionError("run_receiver: plan and code disagree");
    if (ctx.plan->bits_per_symbol != ctx.constellation->bits_per_symbol()) {
        throw DimensionError("run_receiver: plan and constellation disagree on bits per symbol");
    }
}

std::vector<LlrFrame> perfect_csi_llrs(const ReceiverContext& ctx, const BlockObservation& obs) {
    if (obs.h.size() != obs.y.size()) throw DimensionError("run_receiver: perfect CSI needs the true channel");
    std::vector<LlrFrame> llrs;
    for (std::size_t f = 0; f < obs.y.size(); ++f) {
        if (obs.sip != nullptr) {
            auto [y_data, h_eff] = sip_strip_pilot(obs.y[f], obs.h[f], *obs.sip);
            llrs.push_back(
                gaussian_demap(*ctx.constellation, y_data, perfect_estimate(h_eff), obs.sigma2, *ctx.pattern).values);
        } else {
            llrs.push_back(
                gaussian_demap(*ctx.constellation, obs.y[f], perfect_estimate(obs.h[f]), obs.sigma2, *ctx.pattern)
                    .values);
        }
    }
    return llrs;
}

const Eigen::MatrixXcd& frame_covariance(const BlockObservation& obs, std::size_t f) {
    if (obs.covariance.size() != obs.y.size() || obs.covariance[f] == nullptr) {
        throw ConfigError("run_receiver: estimating receivers need a covariance per frame");
    }
    return *obs.covariance[f];
}

ReceiverOutput run_iedd(const ReceiverContext& ctx, const BlockObservation& obs) {
    const auto& c = *ctx.constellation;
    const auto& pattern = *ctx.pattern;
    const auto& plan = *ctx.plan;
    const std::size_t m = c.bits_per_symbol();
    const std::size_t frames = obs.y.size();
    if (ctx.settings.outer_iterations < 1) throw ConfigError("run_receiver: IEDD needs at least one outer iteration");

    ReceiverOutput out;
    // The estimator sees the decoder's a-posteriori LLRs, the demapper only its extrinsic part.
    std::vector<LlrFrame> prior(frames, LlrFrame(pattern.dims().size() * m, 0.0));
    std::vector<LlrFrame> app = prior;
    for (int outer = 0; outer < ctx.settings.outer_iterations; ++outer) {
        std::vector<LlrFrame> extrinsic(frames);
        for (std::size_t f = 0; f < frames; ++f) {
            const LlrGrid prior_grid = llr_grid_from_frame(pattern, m, LlrRole::decoder_prior, prior[f]);
            const LlrGrid app_grid = llr_grid_from_frame(pattern, m, LlrRole::decoder_prior, app[f]);
            const SymbolPrior sp = prior_from_llrs(c, app_grid, pattern);
            const ChannelEstimate est = data_aided_estimate(frame_covariance(obs, f), obs.y[f], sp, obs.sigma2);
            extrinsic[f] = iedd_demap(c, obs.y[f], est, obs.sigma2, prior_grid).extrinsic.values;
            round_to_decoder_precision(extrinsic[f]);
        }
        if (outer == 0) out.channel_llrs = extrinsic;

        const auto inputs = disassemble(plan, extrinsic);
        std::vector<std::vector<double>> decoder_ext(inputs.size());
        std::vector<std::vector<double>> decoder_app(inputs.size());
        out.codewords.assign(inputs.size(), {});
        bool all_converged = true;
        for (std::size_t cw = 0; cw < inputs.size(); ++cw) {
            auto res = decode(*ctx.code, inputs[cw], DecodeOptions{ctx.settings.inner_bp_iterations, true});
            decoder_ext[cw].resize(inputs[cw].size());
            decoder_app[cw].resize(inputs[cw].size());
            for (std::size_t j = 0; j < inputs[cw].size(); ++j) {
                decoder_ext[cw][j] = clamp_llr(res.output_llrs[j] - inputs[cw][j]);
                decoder_app[cw][j] = clamp_llr(res.output_llrs[j]);
            }
            all_converged = all_converged && res.converged;
            out.codewords[cw] = std::move(res.hard_bits);
        }
        out.outer_iterations_used = outer + 1;
        if (ctx.settings.stop_on_convergence && all_converged) break;
        prior = scatter_soft(plan, decoder_ext, 0.0);
        app = scatter_soft(plan, decoder_app, 0.0);
    }
    return out;
}

}  // namespace

ReceiverOutput run_receiver(ReceiverKind kind, const ReceiverContext& ctx, const BlockObservation& obs) {
    check_context(ctx, obs);
    if (obs.sip != nullptr && kind != ReceiverKind::perfect_csi) {
        throw ConfigError("run_receiver: superimposed pilots are only supported with perfect_csi");
    }
    ReceiverOutput out;
    switch (kind) {
        case ReceiverKind::perfect_csi:
            out.channel_llrs = perfect_csi_llrs(ctx, obs);
            break;
        case ReceiverKind::non_iterative:
            for (std::size_t f = 0; f < obs.y.size(); ++f) {
                const auto est = lmmse_estimate(frame_covariance(obs, f), *ctx.pattern, obs.y[f], obs.sigma2);
                out.channel_llrs.push_back(
                    gaussian_demap(*ctx.constellation, obs.y[f], est, obs.sigma2, *ctx.pattern).values);
            }
            break;
        case ReceiverKind::iedd:
            return run_iedd(ctx, obs);
    }
    for (auto& f : out.channel_llrs) round_to_decoder_precision(f);
    out.codewords = decode_block(*ctx.code, *ctx.plan, out.channel_llrs, ctx.settings.bp_iterations);
    out.outer_iterations_used = 1;
    return out;
}

}  // namespace ofdmlink
