#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sgi/errors.hpp"

namespace sgi {

/// Dormand-Prince 5(4) with an embedded error estimate and PI step control.
/// advance_to() lands exactly on the requested time, so callers can clamp
/// the integration to sample instants. Every accepted step is recorded with
/// its derivative for Hermite interpolation between nodes.
template <std::size_t N, typename Rhs>
class AdaptiveRk {
public:
    using State = std::array<double, N>;

    struct Node {
        double t;
        State y;
        State dydt;
    };

    AdaptiveRk(Rhs rhs, double t0, const State& y0, double rel_tol,
               const State& abs_tol, double initial_dt)
        : rhs_(rhs), t_(t0), y_(y0), rel_tol_(rel_tol), abs_tol_(abs_tol),
          dt_(initial_dt) {
        rhs_(t_, y_, f_);
        nodes_.push_back({t_, y_, f_});
    }

    void advance_to(double t_end) {
        while (t_ < t_end) {
            // gaps below time resolution are not worth a step
            if (t_end - t_ <= 4e-16 * std::max(1.0, std::abs(t_end))) {
                t_ = t_end;
                break;
            }
            double dt = std::min(dt_, t_end - t_);
            bool clamped = dt < dt_;
            if (!attempt_step(dt, clamped)) {
                if (dt_ < 1e-14 * std::max(1.0, std::abs(t_))) {
                    fail(ErrorCode::stiffness,
                         "integrator step size underflow at t = " + std::to_string(t_));
                }
            }
        }
    }

    [[nodiscard]] double time() const { return t_; }
    [[nodiscard]] const State& state() const { return y_; }
    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }

private:
    // returns true when the step was accepted
    bool attempt_step(double dt, bool clamped) {
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        State k2, k3, k4, k5, k6, k7, tmp, y_new;
        const State& k1 = f_; // FSAL

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + dt * a21 * k1[i];
        rhs_(t_ + dt / 5.0, tmp, k2);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + dt * (a31 * k1[i] + a32 * k2[i]);
        rhs_(t_ + 3.0 * dt / 10.0, tmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t_ + 4.0 * dt / 5.0, tmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(t_ + 8.0 * dt / 9.0, tmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                   a64 * k4[i] + a65 * k5[i]);
        rhs_(t_ + dt, tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y_[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                     b5 * k5[i] + b6 * k6[i]);
        rhs_(t_ + dt, y_new, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double e = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                             e6 * k6[i] + e7 * k7[i]);
            double scale = abs_tol_[i] + rel_tol_ * std::max(std::abs(y_[i]), std::abs(y_new[i]));
            double r = e / scale;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(N));

        if (err <= 1.0) {
            t_ += dt;
            y_ = y_new;
            f_ = k7;
            nodes_.push_back({t_, y_, f_});
            double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            double next = dt * std::min(5.0, grow);
            // a clamped step must not shrink the working step size
            dt_ = clamped ? std::max(dt_, next) : next;
            return true;
        }
        dt_ = dt * std::max(0.2, 0.9 * std::pow(err, -0.2));
        return false;
    }

    Rhs rhs_;
    double t_;
    State y_;
    State f_{};
    double rel_tol_;
    State abs_tol_;
    double dt_;
    std::vector<Node> nodes_;
};

} // namespace sgi
