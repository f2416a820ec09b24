#pragma once

#include <cstdint>
#include <stdexcept>

namespace selcomp {

/// Distribution-free running statistics of one arm: sample count and mean.
class ArmStats {
public:
    ArmStats() = default;

    static ArmStats from_mean(std::uint64_t n, double mean) {
        if (!(mean >= 0.0 && mean <= 1.0)) throw std::invalid_argument("ArmStats: mean outside [0,1]");
        ArmStats a;
        a.n_ = n;
        a.sum_ = mean * static_cast<double>(n);
        return a;
    }

    static ArmStats from_sum(std::uint64_t n, double sum) {
        if (!(sum >= 0.0 && sum <= static_cast<double>(n))) throw std::invalid_argument("ArmStats: sum outside [0,n]");
        ArmStats a;
        a.n_ = n;
        a.sum_ = sum;
        return a;
    }

    void record(double x) {
        ++n_;
        sum_ += x;
    }

    std::uint64_t n() const { return n_; }
    double sum() const { return sum_; }
    double mean() const { return n_ == 0 ? 0.0 : sum_ / static_cast<double>(n_); }

    friend bool operator==(const ArmStats&, const ArmStats&) = default;

private:
    std::uint64_t n_ = 0;
    double sum_ = 0.0;
};

}  // namespace selcomp
