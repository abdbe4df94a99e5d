#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>

#include "sgi/run_spec.hpp"

namespace sgi {

struct FieldVec {
    double bx = 0.0;
    double by = 0.0;
};

enum class ProfileKind { gradient_positive, uniform, gradient_negative };

/// One of the three canonical linear field profiles. On-axis the x component
/// is affine, Bx = offset - slope * x.
struct FieldProfile {
    ProfileKind kind = ProfileKind::gradient_positive;
    double B0 = 0.0;
    double B1 = 0.0;
    double eta = 0.0;

    [[nodiscard]] FieldVec at(double x, double y) const;
    [[nodiscard]] double dbx_dx() const;
    [[nodiscard]] double offset() const; // Bx(0, 0)
    [[nodiscard]] double slope() const;  // -d Bx / dx
};

struct Weights {
    double w1 = 0.0, w2 = 0.0, w3 = 0.0;
};

/// The three profiles blended in time by complementary tanh weights centred
/// on t_mid1 (gradient -> uniform) and t_mid2 (uniform -> reversed gradient).
/// Midpoints may be +infinity while still undetermined; the corresponding
/// weight is then exactly 0/1.
struct FieldSchedule {
    double B0 = 0.0;
    double B1 = 0.0;
    double eta = 0.0;
    double delta = 0.0;
    double t_mid1 = 0.0;
    double t_mid2 = 0.0;
    double window = 0.0; // T_sw, reported window duration

    [[nodiscard]] Weights weights(double t) const;
    [[nodiscard]] FieldVec field(double x, double y, double t) const;
    [[nodiscard]] double dbx_dx(double t) const; // spatial gradient of Bx
    [[nodiscard]] double offset(double t) const; // on-axis Bx = offset - slope * x
    [[nodiscard]] double slope(double t) const;

    static FieldSchedule from_run(const RunSpec& run, double t_mid1, double t_mid2);
};

/// Two-sided tanh switch pulse: 1 deep inside [t_on, t_off], 0 far outside,
/// 0.5 at either edge when the window is long against 1/delta.
double switching_weight(double t, double t_on, double t_off, double delta);

/// Low-field interval of an affine on-axis field Bx = b - p x. Empty for
/// (near) uniform fields.
std::optional<std::pair<double, double>> forbidden_interval(double b, double p,
                                                            double epsilon);
std::optional<std::pair<double, double>> forbidden_interval(const FieldSchedule&,
                                                            double t, double epsilon);

struct MaxwellResidual {
    double max_div = 0.0;
    double max_curl = 0.0;
};

/// Central finite differences of the blended field on caller-supplied
/// (x, y, t) points.
MaxwellResidual maxwell_residuals(const FieldSchedule&,
                                  std::span<const std::array<double, 3>> points,
                                  double h);

} // namespace sgi
