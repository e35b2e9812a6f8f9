#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace sppkit {

// Supplies the disturbance b_i(t) inside the declared margin during replay.
// Plans never see these values; the replay engine queries step by step.
class Adversary {
  public:
    virtual ~Adversary() = default;
    virtual double draw(std::size_t agent, long step, double margin) = 0;
    virtual std::string describe() const = 0;
};

class ZeroAdversary final : public Adversary {
  public:
    double draw(std::size_t, long, double) override { return 0.0; }
    std::string describe() const override { return "zero"; }
};

// Worst-case corners: +-margin with a random sign per (agent, step).
class EndpointAdversary final : public Adversary {
  public:
    explicit EndpointAdversary(std::uint64_t seed) : seed_(seed) {}
    double draw(std::size_t agent, long step, double margin) override {
        RandomStream s(seed_, stream_tag::adversary, agent);
        return (s.bits(static_cast<std::uint64_t>(step)) & 1u) ? margin : -margin;
    }
    std::string describe() const override { return "endpoint(seed=" + std::to_string(seed_) + ")"; }

  private:
    std::uint64_t seed_;
};

class UniformAdversary final : public Adversary {
  public:
    explicit UniformAdversary(std::uint64_t seed) : seed_(seed) {}
    double draw(std::size_t agent, long step, double margin) override {
        RandomStream s(seed_, stream_tag::adversary, agent);
        return s.uniform(static_cast<std::uint64_t>(step), -margin, margin);
    }
    std::string describe() const override { return "uniform(seed=" + std::to_string(seed_) + ")"; }

  private:
    std::uint64_t seed_;
};

// Fixed sign grid in {-1, 0, +1}, indexed by (step - base) * n + agent; used
// for exhaustive enumeration over short horizons.
class ScriptedAdversary final : public Adversary {
  public:
    ScriptedAdversary(std::vector<int> signs, std::size_t n, long base_step = 0)
        : signs_(std::move(signs)), n_(n), base_(base_step) {}
    double draw(std::size_t agent, long step, double margin) override {
        const auto idx = static_cast<std::size_t>(step - base_) * n_ + agent;
        if (idx >= signs_.size()) throw InadmissibleControl("scripted adversary: step beyond script");
        return static_cast<double>(signs_[idx]) * margin;
    }
    std::string describe() const override { return "scripted"; }

  private:
    std::vector<int> signs_;
    std::size_t n_;
    long base_;
};

} // namespace sppkit
