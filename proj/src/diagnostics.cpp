#include "tpslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace tpslab::diagnostics {

void ObservableSet::validate(int m) const {
    if (operators.empty()) fail(errc::config_invalid, "observable set is empty");
    if (!(epsilon > 0.0)) fail(errc::config_invalid, "observable epsilon must be > 0");
    for (const CMat& a : operators) {
        if (a.rows() != m || a.cols() != m)
            fail(errc::dimension_mismatch, "observable dimension != system dimension");
        if (!qla::is_hermitian(a, 1e-12 * std::max(1.0, qla::max_abs(a))))
            fail(errc::non_hermitian_input, "observable is not Hermitian");
    }
}

double equilibration_metric(const dynamics::Trajectory& traj, const CMat& rho_bar) {
    if (traj.reduced_states.empty())
        fail(errc::empty_trajectory, "equilibration_metric: empty trajectory");
    double acc = 0.0;
    for (const CMat& rho : traj.reduced_states) acc += qla::trace_distance(rho, rho_bar);
    return acc / static_cast<double>(traj.reduced_states.size());
}

namespace {

double max_pairwise_distance(const std::vector<CMat>& states) {
    double worst = 0.0;
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = a + 1; b < states.size(); ++b)
            worst = std::max(worst, qla::trace_distance(states[a], states[b]));
    return worst;
}

} // namespace

double system_isi(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                  const CVec& bath_state, const std::vector<CVec>& system_states) {
    if (system_states.size() < 2)
        fail(errc::dimension_mismatch, "system_isi: need at least 2 system states");
    std::vector<CMat> averages;
    averages.reserve(system_states.size());
    for (const CVec& phi : system_states) {
        const CVec psi0 = tps::embed_product({phi, bath_state}, tps);
        averages.push_back(dynamics::diagonal_ensemble(psi0, spec, tps));
    }
    return max_pairwise_distance(averages);
}

double bath_isi(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                const CVec& system_state, const std::vector<CVec>& bath_states) {
    if (bath_states.size() < 2)
        fail(errc::dimension_mismatch, "bath_isi: need at least 2 bath states");
    std::vector<CMat> averages;
    averages.reserve(bath_states.size());
    for (const CVec& chi : bath_states) {
        const CVec psi0 = tps::embed_product({system_state, chi}, tps);
        averages.push_back(dynamics::diagonal_ensemble(psi0, spec, tps));
    }
    return max_pairwise_distance(averages);
}

double eth_statistic(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                     double window_lo, double window_hi) {
    if (spec.dim() != tps.dim())
        fail(errc::dimension_mismatch, "eth_statistic: dim mismatch");
    std::vector<CMat> reduced;
    for (int l = 0; l < spec.dim(); ++l) {
        if (spec.eigenvalues(l) < window_lo || spec.eigenvalues(l) > window_hi) continue;
        reduced.push_back(tps::reduced_pure(spec.frame.col(l), tps, qla::Keep::system));
    }
    if (reduced.size() < 2)
        fail(errc::empty_window, "eth_statistic: window holds " +
                                     std::to_string(reduced.size()) +
                                     " eigenstates, need at least 2");
    return max_pairwise_distance(reduced);
}

namespace {

double variance(const CMat& rho, const CMat& a) {
    const double mean = (rho * a).trace().real();
    const double second = (rho * a * a).trace().real();
    return second - mean * mean;
}

} // namespace

EdhResult edh_statistic(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                        const ObservableSet& obs) {
    if (spec.dim() != tps.dim())
        fail(errc::dimension_mismatch, "edh_statistic: dim mismatch");
    obs.validate(tps.m);
    EdhResult result;
    for (int l = 0; l < spec.dim(); ++l) {
        const CMat rho = tps::reduced_pure(spec.frame.col(l), tps, qla::Keep::system);
        result.max_mixedness = std::max(result.max_mixedness, 1.0 - qla::purity(rho));
        for (const CMat& a : obs.operators)
            result.max_variance = std::max(result.max_variance, variance(rho, a));
    }
    return result;
}

double mutual_unbiasedness(const CMat& basis_a, const CMat& basis_b) {
    if (basis_a.rows() != basis_b.rows() || basis_a.cols() != basis_b.cols() ||
        basis_a.rows() != basis_a.cols())
        fail(errc::dimension_mismatch, "mutual_unbiasedness: bases must be square, equal dims");
    const int m = static_cast<int>(basis_a.rows());
    const CMat overlaps = basis_a.adjoint() * basis_b;
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            worst = std::max(worst, std::abs(std::norm(overlaps(i, k)) - 1.0 / m));
    return worst;
}

QuasiClassicality quasiclassicality(const CVec& phi, const ObservableSet& obs) {
    obs.validate(static_cast<int>(phi.size()));
    qla::validate_state(phi, "quasiclassicality");
    QuasiClassicality out;
    for (const CMat& a : obs.operators) {
        const CVec aphi = a * phi;
        const double mean = phi.dot(aphi).real();
        const double second = aphi.squaredNorm();
        out.max_variance = std::max(out.max_variance, second - mean * mean);
    }
    out.in_set = out.max_variance < obs.epsilon;
    return out;
}

GibbsFit gibbs_fit(const CMat& rho_bar, const CMat& h_eff, double beta_max) {
    qla::require_hermitian(h_eff, 1e-10, "gibbs_fit");
    if (rho_bar.rows() != h_eff.rows())
        fail(errc::dimension_mismatch, "gibbs_fit: dimension mismatch");

    const qla::SpectralDecomposition spec = qla::eig_hermitian(h_eff);
    const double range = spec.spectral_range();
    if (beta_max <= 0.0) beta_max = range > 0.0 ? 50.0 / range : 1.0;

    auto gibbs_distance = [&](double beta) {
        RVec weights(spec.dim());
        const double ref = beta >= 0.0 ? spec.eigenvalues(0) : spec.eigenvalues(spec.dim() - 1);
        for (int l = 0; l < spec.dim(); ++l)
            weights(l) = std::exp(-beta * (spec.eigenvalues(l) - ref));
        weights /= weights.sum();
        const CVec cw = weights.cast<cx>();
        const CMat gibbs = spec.frame * cw.asDiagonal() * spec.frame.adjoint();
        return qla::trace_distance(rho_bar, gibbs);
    };

    // golden-section search
    const double phi_ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -beta_max, hi = beta_max;
    double x1 = hi - phi_ratio * (hi - lo);
    double x2 = lo + phi_ratio * (hi - lo);
    double f1 = gibbs_distance(x1);
    double f2 = gibbs_distance(x2);
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, beta_max); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi_ratio * (hi - lo);
            f1 = gibbs_distance(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi_ratio * (hi - lo);
            f2 = gibbs_distance(x2);
        }
    }
    GibbsFit fit;
    fit.beta = 0.5 * (lo + hi);
    fit.residual = gibbs_distance(fit.beta);
    return fit;
}

void DiagnosticsReport::add(std::string name, double value, std::string context) {
    if (!std::isfinite(value))
        fail(errc::convergence_failure, "report value for " + name + " is not finite");
    entries.push_back({std::move(name), quantize15(value), std::move(context)});
}

const ReportEntry* DiagnosticsReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

double quantize15(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return std::strtod(buf, nullptr);
}

std::string DiagnosticsReport::to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["model"] = model;
    j["tps"] = tps_label;
    j["seed"] = seed;
    j["grid"] = grid;
    j["warnings"] = warnings;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json item;
        item["name"] = e.name;
        item["value"] = e.value;
        item["context"] = e.context;
        results.push_back(std::move(item));
    }
    j["results"] = std::move(results);
    return j.dump(2);
}

std::string DiagnosticsReport::to_csv() const {
    std::ostringstream out;
    out << "name,value,context\n";
    char buf[64];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof(buf), "%.15g", e.value);
        out << e.name << ',' << buf << ',' << e.context << '\n';
    }
    return out.str();
}

} // namespace tpslab::diagnostics
