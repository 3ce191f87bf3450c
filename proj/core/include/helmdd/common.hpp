#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace helmdd {

using Complex = std::complex<double>;

/// Thrown when a factorization meets a column with no admissible pivot,
/// i.e. the matrix is singular for structural (pattern) reasons.
struct StructurallySingular : std::runtime_error {
    explicit StructurallySingular(const std::string& what) : std::runtime_error(what) {}
};

/// Counter-based generator with reproducible, platform-independent output.
/// All randomness in the library (start vectors, per-cell seeds, test data)
/// goes through this so that reruns and re-orderings cannot change results.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

/// Deterministic seed derivation: mixes a sub-stream index into a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    SplitMix64 g(master ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    return g.next();
}

} // namespace helmdd
