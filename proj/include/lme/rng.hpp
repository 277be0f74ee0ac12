#pragma once
// Counter-based RNG: Philox-4x32 with 10 rounds, plus Box-Muller normals.
// Chosen so that (a) every (seed, path, step) tuple maps to the same draws
// regardless of execution order or thread count, and (b) dt-refinement runs
// can couple coarse and fine noise exactly by summing sub-increments.

#include <array>
#include <cmath>
#include <cstdint>

namespace lme {

struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> x,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMul0) * x[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * x[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return x;
    }
};

// Stateless stream view over Philox blocks. Counter layout:
//   {path_lo, path_hi, step, purpose}; key = {seed_lo, seed_hi}.
// purpose 0 = per-step simulation noise, 1 = per-path type draw.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::array<double, 4> uniforms(std::uint64_t path, std::uint32_t step,
                                   std::uint32_t purpose = 0) const {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(path),
            static_cast<std::uint32_t>(path >> 32), step, purpose};
        const std::array<std::uint32_t, 2> key = {
            static_cast<std::uint32_t>(seed_),
            static_cast<std::uint32_t>(seed_ >> 32)};
        const auto words = Philox4x32::block(ctr, key);
        std::array<double, 4> u;
        for (int i = 0; i < 4; ++i)
            u[i] = (static_cast<double>(words[i]) + 0.5) * 0x1p-32;
        return u;
    }

    // Four standard normals per counter via Box-Muller on two uniform pairs.
    std::array<double, 4> normals(std::uint64_t path, std::uint32_t step,
                                  std::uint32_t purpose = 0) const {
        const auto u = uniforms(path, step, purpose);
        std::array<double, 4> z;
        box_muller(u[0], u[1], z[0], z[1]);
        box_muller(u[2], u[3], z[2], z[3]);
        return z;
    }

    double normal_theta(std::uint64_t path) const {
        return normals(path, 0, 1)[0];
    }

    std::uint64_t seed() const { return seed_; }

  private:
    static void box_muller(double u1, double u2, double& z0, double& z1) {
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        z0 = r * std::cos(phi);
        z1 = r * std::sin(phi);
    }

    std::uint64_t seed_;
};

}  // namespace lme
