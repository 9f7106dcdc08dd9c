#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace affect {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

// Error hierarchy. The CLI maps each category onto a stable exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// AffectNet expression order. Shared by every module that reads 8-class scores.
namespace affectnet {
inline constexpr int kNumClasses = 8;
inline constexpr int kAnger = 0;
inline constexpr int kContempt = 1;
inline constexpr int kDisgust = 2;
inline constexpr int kFear = 3;
inline constexpr int kHappiness = 4;
inline constexpr int kNeutral = 5;
inline constexpr int kSadness = 6;
inline constexpr int kSurprise = 7;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Anger", "Contempt", "Disgust", "Fear", "Happiness", "Neutral", "Sadness", "Surprise"};
}  // namespace affectnet

// Aff-Wild2 EXPR order: six basic expressions plus Neutral and Other.
namespace affwild2 {
inline constexpr int kNumClasses = 8;
inline constexpr int kOther = 7;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Neutral", "Anger", "Disgust", "Fear", "Happiness", "Sadness", "Surprise", "Other"};
}  // namespace affwild2

inline constexpr std::array<std::string_view, 6> kEmiCategories = {
    "Admiration", "Amusement", "Determination", "Empathic_Pain", "Excitement", "Joy"};

inline constexpr int kDefaultActionUnits = 12;

/// Index of the largest coefficient; ties go to the lowest index.
template <typename Derived>
Index argmax(const Eigen::DenseBase<Derived>& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

/// Uniform double in [0, 1) from the top 53 bits. Unlike
/// std::uniform_real_distribution the mapping is fixed across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on uniform01, for the same reason.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Uniform integer in [0, n) by rejection.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return r % n;
}

}  // namespace affect
