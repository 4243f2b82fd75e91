#pragma once

#include <string>
#include <vector>

namespace mfgn {

/// Named closed-form scalar field over (t, x), selected by name + parameters
/// in config files. Never executable code.
///
///   constant: value
///   affine:   base + sum_d slope[d] * x_d + tslope * t
///   gaussian: base + amp * exp(-sum_d ((x_d - center[d]) / width)^2)
struct FieldExpr {
    enum class Kind { constant, affine, gaussian };
    Kind kind = Kind::constant;
    double value = 0.0;               // constant
    double base = 0.0;                // affine, gaussian
    std::vector<double> slope;        // affine
    double tslope = 0.0;              // affine
    double amp = 0.0;                 // gaussian
    std::vector<double> center;       // gaussian
    double width = 1.0;               // gaussian

    static FieldExpr constant_expr(double v) {
        FieldExpr e;
        e.kind = Kind::constant;
        e.value = v;
        return e;
    }

    double eval(double t, const double* x, int dim) const;
    std::string kind_name() const;
};

} // namespace mfgn
