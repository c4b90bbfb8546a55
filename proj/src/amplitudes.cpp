#include "cbs/amplitudes.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "cbs/thread_pool.hpp"

namespace cbs {

std::string to_string(TraceKind k)
{
    switch (k)
    {
    case TraceKind::I_A:
        return "I_A";
    case TraceKind::I_B:
        return "I_B";
    case TraceKind::INT:
        return "INT";
    }
    return "?";
}

EventList events_T(Path path, double s, double t)
{
    if (!(s >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("scattering times must be >= 0");

    Wavevector const khat{1, 0};
    Wavevector const nhat{0, 1};
    if (path == Path::A)
    {
        return {{2, khat, 0.0},
                {2, nhat, -s},
                {1, -nhat, -s},
                {1, khat, -s - t}};
    }
    // R_1 <-> R_2 and nhat -> -nhat
    return {{1, khat, 0.0},
            {1, -nhat, -s},
            {2, nhat, -s},
            {2, khat, -s - t}};
}

EventList adjoint_reversed(EventList const& events)
{
    EventList out;
    for (auto it = events.end(); it != events.begin();)
    {
        --it;
        out.push_back({it->atom, -it->q, it->time});
    }
    return out;
}

namespace {

std::pair<Path, Path> paths_of(TraceKind kind)
{
    switch (kind)
    {
    case TraceKind::I_A:
        return {Path::A, Path::A};
    case TraceKind::I_B:
        return {Path::B, Path::B};
    case TraceKind::INT:
        return {Path::A, Path::B};
    }
    throw std::logic_error("unknown trace kind");
}

} // namespace

EventList trace_events(TraceKind kind, double s, double t, double sp, double tp)
{
    auto const [left, right] = paths_of(kind);
    return adjoint_reversed(events_T(left, sp, tp)) + events_T(right, s, t);
}

std::complex<double> trace_integrand(TraceKind kind,
                                     double s,
                                     double t,
                                     double sp,
                                     double tp,
                                     PhysParams const& p)
{
    using namespace std::complex_literals;
    auto const g = p.gamma();
    auto const envelope
        = std::exp(1i * g * (s + t) - 1i * std::conj(g) * (sp + tp));
    return envelope * correlator(trace_events(kind, s, t, sp, tp), p);
}

CoordMap identity_map()
{
    return {{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
}

std::array<CoordMap, 2> ordered_regions()
{
    // rows: s, t, s', t' in terms of (b_s, u_s, b_t, u_t)
    CoordMap const both{{{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 0, 0}, {0, 0, 1, 0}}};
    CoordMap const mixed{{{1, 1, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, 0}, {0, 0, 1, 1}}};
    return {both, mixed};
}

//---------------------------------------------------------------------------//
// TraceIntegrand
//---------------------------------------------------------------------------//

TraceIntegrand::TraceIntegrand(TraceKind kind,
                               PhysParams const& p,
                               CoordMap const& map)
    : kind_(kind), params_(p), map_(map)
{
    p.validate();

    using namespace std::complex_literals;
    auto const g = p.gamma();
    std::array<quad::cplx, 4> const x_rates{
        1i * g, 1i * g, -1i * std::conj(g), -1i * std::conj(g)};
    for (int w = 0; w < 4; ++w)
    {
        rates_[w] = 0.0;
        for (int v = 0; v < 4; ++v)
            rates_[w] += x_rates[v] * static_cast<double>(map[v][w]);
        if (!(rates_[w].real() < 0.0))
            throw std::invalid_argument("coordinate map loses the envelope decay");
    }

    // Event times are linear in x = (s, t, s', t'); read off the integer
    // coefficients by probing the unit vectors.
    std::array<EventList, 4> probes;
    for (int v = 0; v < 4; ++v)
    {
        std::array<double, 4> x{0, 0, 0, 0};
        x[v] = 1.0;
        probes[v] = trace_events(kind, x[0], x[1], x[2], x[3]);
    }
    EventList const ref = trace_events(kind, 0, 0, 0, 0);
    std::size_t const n = ref.size();
    std::vector<std::array<int, 4>> coeff(n);
    for (std::size_t a = 0; a < n; ++a)
    {
        for (int v = 0; v < 4; ++v)
        {
            auto const& e = probes[v][a];
            if (e.atom != ref[a].atom || !(e.q == ref[a].q))
                throw std::logic_error("event structure depends on times");
            coeff[a][v] = static_cast<int>(std::lround(e.time));
        }
    }

    std::map<std::array<int, 4>, double> merged;
    for (std::size_t a = 0; a < n; ++a)
    {
        for (std::size_t b = a + 1; b < n; ++b)
        {
            if (ref[a].atom != ref[b].atom)
                continue;
            std::array<int, 4> d{0, 0, 0, 0};
            bool zero = true;
            for (int w = 0; w < 4; ++w)
            {
                for (int v = 0; v < 4; ++v)
                    d[w] += (coeff[a][v] - coeff[b][v]) * map[v][w];
                zero = zero && d[w] == 0;
            }
            if (zero)
                continue;
            merged[d] -= dot(ref[a].q, ref[b].q, p.mu);
        }
    }
    for (auto const& [d, c] : merged)
    {
        if (c != 0.0)
            terms_.push_back({c, d});
    }
}

std::array<double, 4> TraceIntegrand::length_scales() const
{
    double const a = 0.5 * params_.omega_R * params_.omega_ho
                     * params_.coth_half_theta();
    std::array<double, 4> out;
    for (int w = 0; w < 4; ++w)
    {
        double curv = 0.0;
        for (auto const& term : terms_)
            curv += term.coef * term.time[w] * term.time[w];
        out[w] = curv * a > 0.0 ? 1.0 / std::sqrt(curv * a)
                                : std::numeric_limits<double>::infinity();
    }
    return out;
}

quad::cplx TraceIntegrand::smooth(quad::Point4 const& x) const
{
    quad::cplx log_g = 0.0;
    for (auto const& term : terms_)
    {
        double dt = 0.0;
        for (int v = 0; v < 4; ++v)
            dt += term.time[v] * x[v];
        log_g += term.coef * kernel_diff(dt, params_);
    }
    return std::exp(log_g);
}

namespace {

using quad::cplx;

unsigned mask_of(std::array<int, 4> const& d)
{
    unsigned m = 0;
    for (int v = 0; v < 4; ++v)
    {
        if (d[v] != 0)
            m |= 1u << v;
    }
    return m;
}

// exp(sum c K) tabulated over the axes of one mask (at most three).
// Factors with negative c grow at large times and only the full product is
// bounded, so entries whose log leaves [-kLogGuard, kLogGuard] are stored as
// NaN and the affected grid points are redone from the logs.
constexpr double kLogGuard = 600.0;

struct FactorTable
{
    unsigned mask = 0;
    std::vector<int> axes;
    std::vector<cplx> data;
    std::vector<cplx> logs;

    std::size_t offset(std::array<int, 4> const& idx, std::size_t n) const
    {
        std::size_t off = 0;
        for (int a : axes)
            off = off * n + static_cast<std::size_t>(idx[a]);
        return off;
    }
};

} // namespace

quad::cplx
TraceIntegrand::tensor_contract(std::array<quad::Rule1d const*, 4> const& rules,
                                bool swap_symmetric,
                                int threads) const
{
    std::size_t const n = rules[0]->size();
    for (auto const* r : rules)
    {
        if (r->size() != n)
            return Integrand4d::tensor_contract(rules, swap_symmetric, threads);
    }

    // Group terms by the set of axes they depend on.
    std::map<unsigned, std::vector<PairTerm>> groups;
    for (auto const& term : terms_)
        groups[mask_of(term.time)].push_back(term);

    std::vector<FactorTable> outer_tables; // masks without axis 3
    std::vector<FactorTable> inner_tables; // masks with axis 3, < 4 axes
    std::vector<PairTerm> full_terms;      // depend on all four axes
    for (auto const& [mask, group] : groups)
    {
        if (mask == 0xFu)
        {
            full_terms.insert(full_terms.end(), group.begin(), group.end());
            continue;
        }
        FactorTable table;
        table.mask = mask;
        for (int v = 0; v < 4; ++v)
        {
            if (mask & (1u << v))
                table.axes.push_back(v);
        }
        std::size_t size = 1;
        for (std::size_t a = 0; a < table.axes.size(); ++a)
            size *= n;
        table.data.resize(size);
        table.logs.resize(size);
        std::size_t const rows = n;
        std::size_t const per_row = size / n;
        parallel_for(rows, threads, [&](std::size_t r) {
            for (std::size_t rest = 0; rest < per_row; ++rest)
            {
                std::size_t flat = r * per_row + rest;
                std::array<double, 4> x{0, 0, 0, 0};
                for (auto a = table.axes.rbegin(); a != table.axes.rend(); ++a)
                {
                    x[*a] = rules[*a]->nodes[flat % n];
                    flat /= n;
                }
                cplx log_f = 0.0;
                for (auto const& term : group)
                {
                    double dt = 0.0;
                    for (int v = 0; v < 4; ++v)
                        dt += term.time[v] * x[v];
                    log_f += term.coef * kernel_diff(dt, params_);
                }
                table.logs[r * per_row + rest] = log_f;
                table.data[r * per_row + rest]
                    = std::abs(log_f.real()) <= kLogGuard
                          ? std::exp(log_f)
                          : cplx(std::numeric_limits<double>::quiet_NaN());
            }
        });
        if (mask & 0x8u)
            inner_tables.push_back(std::move(table));
        else
            outer_tables.push_back(std::move(table));
    }

    // Half-angle phases e^{i w x/2} for the four-axis terms:
    // K = -eta^2 [2 coth(theta/2) sin^2(w dt/2) + 2i sin(w dt/2) cos(w dt/2)].
    std::array<std::vector<cplx>, 4> half_phase;
    for (int v = 0; v < 4; ++v)
    {
        half_phase[v].resize(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            double const arg = 0.5 * params_.omega_ho * rules[v]->nodes[i];
            half_phase[v][i] = {std::cos(arg), std::sin(arg)};
        }
    }
    auto phase_pow = [&](int v, std::size_t i, int power) {
        cplx const h = power > 0 ? half_phase[v][i] : std::conj(half_phase[v][i]);
        cplx out = 1.0;
        for (int k = 0; k < std::abs(power); ++k)
            out *= h;
        return out;
    };
    double const eta_sq = params_.eta_sq();
    double const coth = params_.coth_half_theta();

    std::vector<std::vector<cplx>> last_phase(full_terms.size());
    for (std::size_t f = 0; f < full_terms.size(); ++f)
    {
        last_phase[f].resize(n);
        for (std::size_t l = 0; l < n; ++l)
            last_phase[f][l] = phase_pow(3, l, full_terms[f].time[3]);
    }

    auto const& w3 = rules[3]->weights;
    auto inner = [&](int i, int j, int k, int lb, int le) -> cplx {
        std::array<int, 4> idx{i, j, k, 0};
        cplx prefix = 1.0;
        for (auto const& t : outer_tables)
            prefix *= t.data[t.offset(idx, n)];

        // table rows along axis 3 (the last axis of every inner mask)
        std::array<cplx const*, 8> rows{};
        std::size_t const nrows = inner_tables.size();
        for (std::size_t r = 0; r < nrows; ++r)
            rows[r] = inner_tables[r].data.data()
                      + inner_tables[r].offset(idx, n);

        cplx prefix_log = 0.0;
        for (auto const& t : outer_tables)
            prefix_log += t.logs[t.offset(idx, n)];
        std::array<cplx const*, 8> log_rows{};
        for (std::size_t r = 0; r < nrows; ++r)
            log_rows[r] = inner_tables[r].logs.data() + inner_tables[r].offset(idx, n);

        std::array<cplx, 4> h_ijk{};
        for (std::size_t f = 0; f < full_terms.size(); ++f)
        {
            auto const& d = full_terms[f].time;
            h_ijk[f] = phase_pow(0, i, d[0]) * phase_pow(1, j, d[1])
                       * phase_pow(2, k, d[2]);
        }

        cplx acc = 0.0;
        for (int l = lb; l < le; ++l)
        {
            cplx val = prefix;
            for (std::size_t r = 0; r < nrows; ++r)
                val *= rows[r][l];
            cplx log_full = 0.0;
            if (!full_terms.empty())
            {
                for (std::size_t f = 0; f < full_terms.size(); ++f)
                {
                    cplx const h = h_ijk[f] * last_phase[f][l];
                    double const sn = h.imag();
                    double const cs = h.real();
                    log_full += full_terms[f].coef
                                * cplx(-2.0 * coth * sn * sn, -2.0 * sn * cs);
                }
                log_full *= eta_sq;
                val *= std::exp(log_full);
            }
            if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
            {
                cplx log_val = prefix_log + log_full;
                for (std::size_t r = 0; r < nrows; ++r)
                    log_val += log_rows[r][l];
                val = std::exp(log_val);
            }
            acc += w3[l] * val;
        }
        return acc;
    };

    if (inner_tables.size() > 8 || full_terms.size() > 4)
        throw std::logic_error("unexpected trace term structure");
    return quad::contract_tensor(rules, swap_symmetric, threads, inner);
}

} // namespace cbs
