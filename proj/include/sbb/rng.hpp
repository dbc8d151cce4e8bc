#pragma once

#include <cstdint>
#include <random>

namespace sbb {

/// Seeded random generator with explicit sampling algorithms.
///
/// The standard library distribution objects are implementation-defined, so
/// all variate transforms are spelled out here. Given a seed, the draw
/// sequence is identical across runs of the same binary, which is what makes
/// manifest-based reruns byte-identical.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal();

    /// Unit-rate exponential.
    double exponential();

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape > 0.
    double gamma(double shape);

    /// Uniform integer on [0, n), n >= 1. Unbiased (Lemire rejection).
    std::uint64_t uniform_index(std::uint64_t n);

    /// Derive an independent child seed from a master seed and stream id.
    /// Pure function: the same (master, stream) pair always yields the same
    /// seed, so parallel schedules cannot change results.
    static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

  private:
    std::mt19937_64 engine_;
};

} // namespace sbb
