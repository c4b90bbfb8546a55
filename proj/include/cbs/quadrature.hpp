#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cbs::quad {

using cplx = std::complex<double>;
using Point4 = std::array<double, 4>;

//---------------------------------------------------------------------------//
// One-dimensional rules on [0, inf)
//---------------------------------------------------------------------------//

struct Rule1d
{
    std::vector<double> nodes;
    std::vector<cplx> weights;

    std::size_t size() const { return nodes.size(); }
};

//! Gauss-Laguerre nodes and weights for the weight e^{-y}.
struct LaguerreRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
    //! weights[j] * exp(nodes[j] / 2), kept separately because the plain
    //! weights underflow long before this product loses precision.
    std::vector<double> half_scaled_weights;
};

LaguerreRule gauss_laguerre(int n);

/*!
 * Rule for  int_0^inf exp(rate x) g(x) dx  with Re(rate) < 0.
 *
 * Nodes are Gauss-Laguerre nodes for the weight e^{-lambda x} (lambda <= 0
 * selects the decay -Re(rate)); weights make the rule exact for g a
 * polynomial of degree < n, so the oscillation exp(i Im(rate) x) is
 * integrated exactly instead of being sampled. The weights stay bounded for
 * lambda <= 2 |Re(rate)|. With a real rate and lambda = decay this is scaled
 * Gauss-Laguerre.
 */
Rule1d envelope_rule(int n, cplx rate, double lambda = 0.0);

/*!
 * Gauss-Laguerre nodes compressed to the decay lambda > -Re(rate), for
 * integrands that carry their own faster (Gaussian) decay:
 *   int e^{rate x} g(x) dx ~ sum_j W_j e^{y_j} e^{rate x_j} g(x_j) / lambda,
 * x_j = y_j / lambda. Not exact for polynomial g.
 */
Rule1d compressed_rule(int n, cplx rate, double lambda);

//! Tensor driver: axes whose smooth() decay length l is shorter than the
//! envelope decay length use compressed_rule with lambda = kCompression / l;
//! the others use envelope_rule with lambda = kEnvelopeStretch * decay.
inline constexpr double kCompression = 3.0;
inline constexpr double kEnvelopeStretch = 2.0;

//---------------------------------------------------------------------------//
// Integrands
//---------------------------------------------------------------------------//

/*!
 * Integrand on the positive orthant of R^4, split as
 *   f(x) = exp(sum_k rate_k x_k) * smooth(x).
 * The envelope must decay along every axis (Re(rate_k) < 0) and smooth()
 * must be bounded.
 */
class Integrand4d
{
  public:
    virtual ~Integrand4d() = default;

    virtual std::array<cplx, 4> rates() const = 0;
    virtual cplx smooth(Point4 const& x) const = 0;

    //! f(x0, x1, x2, x3) == conj(f(x2, x3, x0, x1)), envelope included.
    virtual bool swap_conjugate() const { return false; }

    //! Decay lengths of smooth() along each axis, infinite when smooth()
    //! does not decay. Axes whose length is shorter than the envelope decay
    //! length get compressed nodes.
    virtual std::array<double, 4> length_scales() const;

    //! Full integrand value.
    cplx operator()(Point4 const& x) const;

    /*!
     * sum_{ijkl} W0_i W1_j W2_k W3_l smooth(x0_i, x1_j, x2_k, x3_l).
     *
     * The default evaluates smooth() at every grid point. Integrands with
     * structure may override to hoist work out of the inner loops.
     * swap_symmetric is set only when swap_conjugate() holds and the rules
     * are pairwise conjugate (see contract_tensor).
     */
    virtual cplx
    tensor_contract(std::array<Rule1d const*, 4> const& rules,
                    bool swap_symmetric,
                    int threads) const;
};

//! Adapts a callable to Integrand4d.
class FunctionIntegrand final : public Integrand4d
{
  public:
    using SmoothFn = std::function<cplx(Point4 const&)>;

    FunctionIntegrand(std::array<cplx, 4> rates, SmoothFn smooth)
        : rates_(rates), smooth_(std::move(smooth))
    {
    }

    std::array<cplx, 4> rates() const override { return rates_; }
    cplx smooth(Point4 const& x) const override { return smooth_(x); }

  private:
    std::array<cplx, 4> rates_;
    SmoothFn smooth_;
};

//! Inner-loop callback for contract_tensor: returns
//! sum_{l in [l_begin, l_end)} W3_l smooth(x0_i, x1_j, x2_k, x3_l).
using InnerSum = std::function<cplx(int i, int j, int k, int l_begin, int l_end)>;

/*!
 * Shared driver for tensor contractions. Parallel over the first axis,
 * deterministic summation order. With `swap_symmetric` the rules must satisfy
 * rule2 == conj(rule0) and rule3 == conj(rule1); only grid points with
 * (i, j) <= (k, l) are visited and the (real) result is assembled from their
 * real parts.
 */
cplx contract_tensor(std::array<Rule1d const*, 4> const& rules,
                     bool swap_symmetric,
                     int threads,
                     InnerSum const& inner);

//---------------------------------------------------------------------------//
// Driver
//---------------------------------------------------------------------------//

enum class Method
{
    tensor_laguerre,
    adaptive,
    monte_carlo
};

std::string to_string(Method m);
Method method_from_string(std::string const& s);

struct QuadratureSpec
{
    Method method = Method::tensor_laguerre;
    //! Points per axis of the tensor rule; the error estimate compares the
    //! result with the rule of half this order.
    int order = 48;
    std::uint64_t mc_samples = 200000;
    std::uint64_t seed = 20040601;
    double target_rel_error = 1e-6;
    //! Tensor: number of order doublings allowed after the first comparison.
    //! Adaptive: bisection depth cap of 12 * max_levels per box.
    int max_levels = 1;
    //! Adaptive: cap on the number of boxes.
    int adaptive_max_boxes = 4096;
    //! Worker threads, 0 = default_threads().
    int threads = 0;

    void validate() const;
};

struct QuadResult
{
    cplx value = 0.0;
    double abs_error_estimate = 0.0;
    std::uint64_t evaluations = 0;
    bool converged = false;
    int order_used = 0;
};

//! Single tensor-rule sum at the given order (no error estimate).
cplx tensor_sum(Integrand4d const& f, int order, int threads = 0);

/*!
 * Integrates f over [0, inf)^4.
 *
 * tensor_laguerre: per-axis rules (see kCompression) of order n and n/2;
 *   value from order n, error |Q_n - Q_{n/2}|; if that misses the target the
 *   order is doubled up to max_levels times.
 * adaptive: tensor Gauss-Kronrod (3/7) boxes on the cube u = 1 - e^{-x/4},
 *   bisecting the box with the largest error along its worst axis.
 * monte_carlo: importance sampling from the exponential envelope; error is
 *   the standard error of the mean.
 *
 * Non-convergence is reported through `converged`, never thrown.
 */
QuadResult integrate4d(Integrand4d const& f, QuadratureSpec const& spec);

} // namespace cbs::quad
