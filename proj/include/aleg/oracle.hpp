// Reference values for testing: normalized P-tilde and Q-tilde at integer
// degree and order via three-term recurrences in double-double arithmetic,
// with a Wronskian self-check gating every output.
#pragma once

#include "aleg/double_double.hpp"

namespace aleg::oracle {

struct OracleResult {
    double pTilde = 0.0, qTilde = 0.0;    // saturating (0 / +-inf out of range)
    double dpTilde = 0.0, dqTilde = 0.0;  // t-derivatives, saturating
    double logP = 0.0, logQ = 0.0;        // log|P-tilde|, log|Q-tilde|
    int signP = 1, signQ = 1;
    double alphaPrime = 0.0;              // (2/pi)(nu+1/2) / (P^2 + Q^2)
    double wronskianResidual = 0.0;       // |W / (-(2/pi)(nu+1/2)) - 1|
    bool lowConfidence = false;
};

// 0 <= muInt <= nuInt, 0 < t < pi. Cost grows linearly with nu + mu.
OracleResult recurrence_pq(long nuInt, long muInt, double t);

double alpha_prime_oracle(long nuInt, long muInt, double t);

}  // namespace aleg::oracle
