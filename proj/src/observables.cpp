#include "cbs/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cbs {

std::string to_string(Regime r)
{
    return r == Regime::zeroT ? "zeroT" : "finiteT";
}

Regime regime_of(PhysParams const& p)
{
    return p.nbar == 0.0 ? Regime::zeroT : Regime::finiteT;
}

quad::QuadResult integrate_trace(TraceKind kind,
                                 PhysParams const& p,
                                 quad::QuadratureSpec const& spec)
{
    if (kind == TraceKind::INT || spec.method != quad::Method::tensor_laguerre)
        return quad::integrate4d(TraceIntegrand(kind, p), spec);

    quad::QuadResult out;
    quad::cplx sum = 0.0;
    for (auto const& map : ordered_regions())
    {
        auto const r = quad::integrate4d(TraceIntegrand(kind, p, map), spec);
        sum += r.value;
        out.abs_error_estimate += 2.0 * r.abs_error_estimate;
        out.evaluations += r.evaluations;
        out.order_used = std::max(out.order_used, r.order_used);
    }
    out.value = 2.0 * sum.real();
    out.converged = out.abs_error_estimate == 0.0
                    || out.abs_error_estimate
                           <= spec.target_rel_error * std::abs(out.value);
    return out;
}

TraceSet compute_traces(PhysParams const& p, quad::QuadratureSpec const& spec)
{
    p.validate();
    spec.validate();
    TraceSet out;
    out.I_A = integrate_trace(TraceKind::I_A, p, spec);
    // way B is way A with nhat reversed, which only flips the sign of mu
    out.I_B = p.mu == 0.0 ? out.I_A : integrate_trace(TraceKind::I_B, p, spec);
    out.INT = integrate_trace(TraceKind::INT, p, spec);
    return out;
}

Estimate visibility(TraceSet const& tr)
{
    double const sum = tr.I_A.value.real() + tr.I_B.value.real();
    double const sum_err = tr.I_A.abs_error_estimate + tr.I_B.abs_error_estimate;
    Estimate e;
    e.value = 2.0 * std::abs(tr.INT.value) / sum;
    e.error = (2.0 * tr.INT.abs_error_estimate + e.value * sum_err) / sum;
    e.converged = tr.converged();
    return e;
}

Estimate predictability(TraceSet const& tr)
{
    double const a = tr.I_A.value.real();
    double const b = tr.I_B.value.real();
    double const sum_err = tr.I_A.abs_error_estimate + tr.I_B.abs_error_estimate;
    Estimate e;
    e.value = std::abs(a - b) / (a + b);
    e.error = (sum_err + e.value * sum_err) / (a + b);
    e.converged = tr.I_A.converged && tr.I_B.converged;
    return e;
}

Estimate visibility(PhysParams const& p, quad::QuadratureSpec const& spec)
{
    return visibility(compute_traces(p, spec));
}

Estimate predictability(PhysParams const& p, quad::QuadratureSpec const& spec)
{
    p.validate();
    spec.validate();
    TraceSet tr;
    tr.I_A = integrate_trace(TraceKind::I_A, p, spec);
    tr.I_B = p.mu == 0.0 ? tr.I_A : integrate_trace(TraceKind::I_B, p, spec);
    return predictability(tr);
}

double distinguishability_analytic(PhysParams const& p, Regime regime)
{
    auto const d = derive(p);
    if (regime == Regime::zeroT)
        return std::sqrt(d.rho * d.rho + 2.0 * d.zeta_sq);
    return 2.0 / std::sqrt(std::numbers::pi) * std::abs(p.delta)
           / std::sqrt(d.gamma_sq) * std::sqrt(d.xi_cl_sq);
}

double duality_sum_analytic(PhysParams const& p)
{
    auto const d = derive(p);
    double const bracket
        = 1.0 - 2.0 / std::numbers::pi * p.delta * p.delta / d.gamma_sq;
    return 1.0 - 2.0 * bracket * d.xi_cl_sq;
}

double visibility_asymptotic(PhysParams const& p, Regime regime)
{
    auto const d = derive(p);
    double const v_sq = regime == Regime::zeroT
                            ? 1.0 - d.rho * d.rho - 2.0 * d.zeta_sq
                            : 1.0 - 2.0 * d.xi_cl_sq;
    return std::sqrt(std::max(0.0, v_sq));
}

std::vector<std::string> RegimeFlags::names() const
{
    std::vector<std::string> out;
    if (shallow_trap_violated)
        out.emplace_back("shallow_trap");
    if (small_xi_violated)
        out.emplace_back("small_xi");
    if (small_chi_violated)
        out.emplace_back("small_chi");
    if (classical_violated)
        out.emplace_back("classical_limit");
    if (not_converged)
        out.emplace_back("not_converged");
    return out;
}

RegimeFlags regime_flags(PhysParams const& p, Regime regime)
{
    auto const d = derive(p);
    RegimeFlags f;
    f.shallow_trap_violated = p.outside_shallow_trap();
    if (regime == Regime::zeroT)
    {
        f.small_xi_violated = d.zeta_sq > 0.01;
        f.small_chi_violated = d.chi > 0.1;
    }
    else
    {
        f.small_xi_violated = d.xi_cl_sq > 0.1;
        // free recoil is neglected against the Doppler term
        f.small_chi_violated = d.xi_cl_sq == 0.0 || d.chi / d.xi_cl_sq > 0.01;
        f.classical_violated = p.theta() > 0.1;
    }
    return f;
}

DualityReport full_report(PhysParams const& p, quad::QuadratureSpec const& spec)
{
    DualityReport r;
    r.params = p;
    r.derived = derive(p);
    r.regime = regime_of(p);

    auto const traces = compute_traces(p, spec);
    r.I_A = traces.I_A;
    r.I_B = traces.I_B;
    r.INT = traces.INT;

    auto const v = visibility(traces);
    auto const pr = predictability(traces);
    r.V = v.value;
    r.V_err = v.error;
    r.P = pr.value;
    r.P_err = pr.error;
    r.D_analytic = distinguishability_analytic(p, r.regime);
    r.duality_sum = r.V * r.V + r.D_analytic * r.D_analytic;
    r.duality_sum_err = 2.0 * r.V * r.V_err;
    r.V_asymptotic = visibility_asymptotic(p, r.regime);
    r.duality_sum_asymptotic
        = r.regime == Regime::zeroT ? 1.0 : duality_sum_analytic(p);

    r.flags = regime_flags(p, r.regime);
    r.flags.not_converged = !traces.converged();
    return r;
}

} // namespace cbs
