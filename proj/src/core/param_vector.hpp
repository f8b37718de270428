#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace mmd {

// Flat parameter storage. Named slices are views into one contiguous
// vector so optimizer state, preconditioning and parameter-space
// arithmetic are plain vector operations.
struct ParamEntry {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::size_t offset = 0;

    std::size_t size() const {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }
};

class ParamVector {
  public:
    ParamVector() = default;

    void add(const std::string& name, std::vector<std::uint32_t> shape) {
        ParamEntry e;
        e.name = name;
        e.shape = std::move(shape);
        e.offset = static_cast<std::size_t>(data_.size());
        data_.conservativeResize(data_.size() + static_cast<Eigen::Index>(e.size()));
        data_.tail(static_cast<Eigen::Index>(e.size())).setZero();
        layout_.push_back(std::move(e));
    }

    std::size_t size() const { return static_cast<std::size_t>(data_.size()); }
    const std::vector<ParamEntry>& layout() const { return layout_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Eigen::Map<Vec> vec() { return {data_.data(), data_.size()}; }
    Eigen::Map<const Vec> vec() const { return {data_.data(), data_.size()}; }

    const ParamEntry& entry(const std::string& name) const {
        for (const auto& e : layout_)
            if (e.name == name) return e;
        throw UsageError("ParamVector: no entry named '" + name + "'");
    }

    Eigen::Map<Vec> slice(const std::string& name) {
        const auto& e = entry(name);
        return {data_.data() + e.offset, static_cast<Eigen::Index>(e.size())};
    }
    Eigen::Map<const Vec> slice(const std::string& name) const {
        const auto& e = entry(name);
        return {data_.data() + e.offset, static_cast<Eigen::Index>(e.size())};
    }

    // Matrix view of a rank-2 entry, row-major as stored.
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat(
        const std::string& name) {
        const auto& e = entry(name);
        require(e.shape.size() == 2, "ParamVector: '" + name + "' is not rank 2");
        return {data_.data() + e.offset, static_cast<Eigen::Index>(e.shape[0]),
                static_cast<Eigen::Index>(e.shape[1])};
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat(
        const std::string& name) const {
        const auto& e = entry(name);
        require(e.shape.size() == 2, "ParamVector: '" + name + "' is not rank 2");
        return {data_.data() + e.offset, static_cast<Eigen::Index>(e.shape[0]),
                static_cast<Eigen::Index>(e.shape[1])};
    }

    // Zero-filled vector with the same layout.
    ParamVector zeros_like() const {
        ParamVector p;
        p.layout_ = layout_;
        p.data_ = Vec::Zero(data_.size());
        return p;
    }

    bool same_layout(const ParamVector& other) const {
        if (layout_.size() != other.layout_.size()) return false;
        for (std::size_t i = 0; i < layout_.size(); ++i) {
            if (layout_[i].name != other.layout_[i].name ||
                layout_[i].shape != other.layout_[i].shape ||
                layout_[i].offset != other.layout_[i].offset)
                return false;
        }
        return true;
    }

  private:
    // Eigen-owned storage keeps the base pointer maximally aligned, so
    // vectorized reductions over slices group terms identically for
    // every instance with the same layout; heap-address-dependent
    // summation order would otherwise break bitwise reproducibility.
    Vec data_;
    std::vector<ParamEntry> layout_;
};

// Primal/tangent pair sharing one layout; carrier for forward-mode
// directional derivatives through the network.
struct DualParamVector {
    ParamVector primal;
    ParamVector tangent;

    void check() const {
        require(primal.same_layout(tangent), "DualParamVector: layouts differ");
    }
};

}  // namespace mmd
