#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

#include "canvass/dup_forensics.hpp"

namespace canvass {

namespace {

using BigInt = boost::multiprecision::cpp_int;

BigInt binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt result = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        result *= (n - k + i);
        result /= i;  // exact at every step
    }
    return result;
}

// P[X >= k] * C(N, n) for X ~ Hypergeometric(N, M, n), as an integer.
BigInt upper_tail_numerator(std::int64_t N, std::int64_t M, std::int64_t n, std::int64_t k) {
    BigInt total = 0;
    std::int64_t lo = std::max(k, n - (N - M));
    std::int64_t hi = std::min(n, M);
    for (std::int64_t x = lo; x <= hi; ++x) {
        total += binomial(M, x) * binomial(N - M, n - x);
    }
    return total;
}

}  // namespace

ConfidenceBound hypergeometric_lcb(std::int64_t population, std::int64_t sample,
                                   std::int64_t agreements, double confidence) {
    const std::int64_t N = population, n = sample, k = agreements;
    if (N < 0 || n < 0 || k < 0 || k > n || n > N) {
        throw std::domain_error("hypergeometric_lcb: need 0 <= agreements <= sample <= population");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::domain_error("hypergeometric_lcb: confidence must be in (0, 1)");
    }

    // alpha = 1 - confidence, taken as the exact dyadic rational the
    // double encodes: alpha = mantissa / 2^shift.
    const double alpha = 1.0 - confidence;
    int exponent = 0;
    const double mant = std::frexp(alpha, &exponent);
    const BigInt alpha_num = static_cast<std::int64_t>(std::llround(std::ldexp(mant, 53)));
    const int alpha_shift = 53 - exponent;

    const BigInt denom = binomial(N, n);
    // P[X >= k | M] > alpha  <=>  tail_numerator * 2^shift > alpha_num * C(N, n)
    const BigInt rhs = alpha_num * denom;
    auto tail_exceeds = [&](std::int64_t M) {
        return (upper_tail_numerator(N, M, n, k) << alpha_shift) > rhs;
    };

    // The tail is nondecreasing in M and equals 1 at M = N, so the
    // smallest qualifying M exists; binary search for it.
    std::int64_t lo = 0, hi = N;
    while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (tail_exceeds(mid))
            hi = mid;
        else
            lo = mid + 1;
    }

    ConfidenceBound bound;
    bound.population = N;
    bound.sample = n;
    bound.agreements = k;
    bound.confidence = confidence;
    bound.lower_bound = lo;
    return bound;
}

}  // namespace canvass
