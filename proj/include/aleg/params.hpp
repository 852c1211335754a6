// Degree/order parameter pair with the derived quantities used throughout.
#pragma once

#include <stdexcept>

namespace aleg {

struct LegendreParams {
    double nu = 0.0;
    double mu = 0.0;

    LegendreParams() = default;
    LegendreParams(double nu_, double mu_) : nu(nu_), mu(mu_) {
        if (!(nu >= 0.0) || !(mu >= 0.0) || mu > nu)
            throw std::domain_error("LegendreParams: need 0 <= mu <= nu");
    }

    double lambda() const { return nu + 0.5; }
    double eta_sq() const { return mu * mu - 0.25; }
};

}  // namespace aleg
