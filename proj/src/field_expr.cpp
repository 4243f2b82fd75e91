#include "mfgn/field_expr.hpp"

#include "mfgn/errors.hpp"

#include <cmath>

namespace mfgn {

double FieldExpr::eval(double t, const double* x, int dim) const {
    switch (kind) {
        case Kind::constant:
            return value;
        case Kind::affine: {
            double v = base + tslope * t;
            for (int d = 0; d < dim; ++d) v += (d < static_cast<int>(slope.size()) ? slope[d] : 0.0) * x[d];
            return v;
        }
        case Kind::gaussian: {
            double s2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                double cd = d < static_cast<int>(center.size()) ? center[d] : 0.0;
                double z = (x[d] - cd) / width;
                s2 += z * z;
            }
            return base + amp * std::exp(-s2);
        }
    }
    throw ContractViolation("FieldExpr: unknown kind");
}

std::string FieldExpr::kind_name() const {
    switch (kind) {
        case Kind::constant: return "constant";
        case Kind::affine: return "affine";
        case Kind::gaussian: return "gaussian";
    }
    return "?";
}

} // namespace mfgn
