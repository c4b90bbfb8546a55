#include "cbs/correlator.hpp"

#include <cmath>
#include <string>

namespace cbs {

EventList::EventList(std::initializer_list<Event> events)
{
    for (auto const& e : events)
        push_back(e);
}

void EventList::push_back(Event const& e)
{
    if (e.atom != 1 && e.atom != 2)
        throw std::invalid_argument("event atom index must be 1 or 2");
    if (e.q.is_null())
        return;
    events_.push_back(e);
}

void EventList::append(EventList const& other)
{
    events_.insert(events_.end(), other.events_.begin(), other.events_.end());
}

Wavevector EventList::total_q(int atom) const
{
    Wavevector sum;
    for (auto const& e : events_)
    {
        if (e.atom == atom)
            sum += e.q;
    }
    return sum;
}

bool EventList::neutral() const
{
    return total_q(1).is_null() && total_q(2).is_null();
}

std::complex<double> kernel_diff(double dt, PhysParams const& p)
{
    double const phase = p.omega_ho * dt;
    double const s_half = std::sin(0.5 * phase);
    double const re = -2.0 * p.coth_half_theta() * s_half * s_half;
    double const im = -std::sin(phase);
    return p.eta_sq() * std::complex<double>(re, im);
}

std::complex<double> log_correlator(EventList const& events,
                                    PhysParams const& p,
                                    KernelFn const& kernel)
{
    for (int atom : {1, 2})
    {
        auto const q = events.total_q(atom);
        if (!q.is_null())
        {
            throw NeutralityViolation(
                "wavevectors on atom " + std::to_string(atom)
                + " sum to (" + std::to_string(q.along_k) + " khat, "
                + std::to_string(q.along_n) + " nhat)");
        }
    }

    std::complex<double> result = 0.0;
    for (std::size_t a = 0; a < events.size(); ++a)
    {
        for (std::size_t b = a + 1; b < events.size(); ++b)
        {
            if (events[a].atom != events[b].atom)
                continue;
            double const qq = dot(events[a].q, events[b].q, p.mu);
            if (qq == 0.0)
                continue;
            result -= qq * kernel(events[a].time - events[b].time, p);
        }
    }
    return result;
}

std::complex<double> log_correlator(EventList const& events,
                                    PhysParams const& p)
{
    return log_correlator(events, p, kernel_diff);
}

} // namespace cbs
