#include "lowmach/fields.hpp"

#include <cassert>

namespace lowmach {

void axpy(double s, const FaceField& b, FaceField& a) {
    assert(a.nx() == b.nx() && a.ny() == b.ny());
    for (std::size_t k = 0; k < a.xdata().size(); ++k) a.xdata()[k] += s * b.xdata()[k];
    for (std::size_t k = 0; k < a.ydata().size(); ++k) a.ydata()[k] += s * b.ydata()[k];
}

void axpy(double s, const ScalarField& b, ScalarField& a) {
    assert(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) a.data()[k] += s * b.data()[k];
}

}  // namespace lowmach
