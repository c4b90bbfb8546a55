#pragma once

#include <complex>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "cbs/params.hpp"

namespace cbs {

//! Wavevector alpha_k * khat_in + alpha_n * nhat in units of k_in.
struct Wavevector
{
    int along_k = 0;
    int along_n = 0;

    bool is_null() const { return along_k == 0 && along_n == 0; }
    Wavevector operator-() const { return {-along_k, -along_n}; }
    Wavevector& operator+=(Wavevector const& o)
    {
        along_k += o.along_k;
        along_n += o.along_n;
        return *this;
    }
    friend bool operator==(Wavevector const&, Wavevector const&) = default;
};

//! q_a . q_b in units of k_in^2; mu = nhat . khat_in.
inline double dot(Wavevector const& a, Wavevector const& b, double mu)
{
    return a.along_k * b.along_k + a.along_n * b.along_n
           + mu * (a.along_k * b.along_n + a.along_n * b.along_k);
}

//! One factor exp(i q . u_atom(time)) of an operator product.
struct Event
{
    int atom = 1; //!< 1 or 2
    Wavevector q;
    double time = 0.0;

    friend bool operator==(Event const&, Event const&) = default;
};

/*!
 * Ordered operator product of displacement exponentials.
 *
 * Element order is operator order: the first event is the leftmost factor.
 * Null wavevectors are dropped on insertion since they are identity factors.
 */
class EventList
{
  public:
    EventList() = default;
    EventList(std::initializer_list<Event> events);

    void push_back(Event const& e);
    void append(EventList const& other);

    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    Event const& operator[](std::size_t i) const { return events_[i]; }
    auto begin() const { return events_.begin(); }
    auto end() const { return events_.end(); }

    //! Sum of the wavevectors acting on one atom.
    Wavevector total_q(int atom) const;
    //! True when every atom's wavevectors sum to zero.
    bool neutral() const;

    friend EventList operator+(EventList lhs, EventList const& rhs)
    {
        lhs.append(rhs);
        return lhs;
    }
    friend bool operator==(EventList const&, EventList const&) = default;

  private:
    std::vector<Event> events_;
};

//! Thrown for trace evaluations over a non-neutral event list.
class NeutralityViolation : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * Kernel difference K(dt) = k_in^2 [C(dt) - C(0)] of a thermal oscillator.
 *
 * With C(dt) = <u(dt) u(0)> projected on one axis,
 *   K(dt) = eta^2 [ (nbar+1)(e^{-i w dt} - 1) + nbar (e^{i w dt} - 1) ]
 *         = -eta^2 [ 2 coth(theta/2) sin^2(w dt/2) + i sin(w dt) ].
 * The second form has no cancellation for w dt << 1 and reduces to
 * -i omega_R dt - omega_R omega_ho coth(theta/2) dt^2/2 in a shallow trap.
 */
std::complex<double> kernel_diff(double dt, PhysParams const& p);

using KernelFn = std::function<std::complex<double>(double, PhysParams const&)>;

/*!
 * log <e^{X_1} ... e^{X_N}> for X_a = i q_a . u_{atom_a}(t_a) in the thermal
 * state of two independent isotropic traps.
 *
 * All commutators are c-numbers, so the Gaussian moment formula gives
 *   log G = sum_{a<b} <X_a X_b> + 1/2 sum_a <X_a^2>,
 * with a<b meaning a stands to the left of b. Per-atom neutrality turns the
 * equal-time terms into kernel differences, leaving
 *   log G = sum_{a<b, same atom} (-q_a.q_b) K(t_a - t_b).
 * Pairs on different atoms are uncorrelated and never enter the sum.
 */
std::complex<double> log_correlator(EventList const& events,
                                    PhysParams const& p);

//! Same as above with an injected kernel (used by mutation checks).
std::complex<double> log_correlator(EventList const& events,
                                    PhysParams const& p,
                                    KernelFn const& kernel);

inline std::complex<double> correlator(EventList const& events,
                                       PhysParams const& p)
{
    return std::exp(log_correlator(events, p));
}

} // namespace cbs
