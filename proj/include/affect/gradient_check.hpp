#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "affect/head.hpp"
#include "affect/losses.hpp"

namespace affect {

template <typename Scalar>
using OutputLoss = std::function<LossResult<Scalar>(const Matrix<Scalar>&)>;

/// Largest |g_analytic - g_numeric| / max(1e-8, |g_analytic| + |g_numeric|)
/// over every parameter, with central differences of width 2 * step.
template <typename Scalar>
Scalar gradient_check(const OutputLoss<Scalar>& loss, const Head<Scalar>& head, const Matrix<Scalar>& batch,
                      Scalar step = Scalar(1e-5)) {
    typename Head<Scalar>::Trace trace;
    const Matrix<Scalar> out = head.forward(batch, &trace);
    const LossResult<Scalar> base = loss(out);
    if (!std::isfinite(base.value)) throw NumericError("gradient_check: non-finite loss");
    const auto analytic = head.backward(trace, base.grad);

    Head<Scalar> probe = head;
    Scalar worst = 0;
    for (std::size_t p = 0; p < probe.parameters().size(); ++p) {
        auto& param = probe.parameters()[p];
        for (Index k = 0; k < param.size(); ++k) {
            const Scalar saved = param(k);
            param(k) = saved + step;
            const Scalar up = loss(probe.forward(batch)).value;
            param(k) = saved - step;
            const Scalar down = loss(probe.forward(batch)).value;
            param(k) = saved;
            const Scalar numeric = (up - down) / (Scalar(2) * step);
            const Scalar exact = analytic[p](k);
            if (!std::isfinite(numeric) || !std::isfinite(exact)) throw NumericError("gradient_check: non-finite gradient");
            const Scalar rel = std::abs(exact - numeric) / std::max(Scalar(1e-8), std::abs(exact) + std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace affect
