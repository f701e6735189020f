#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace figar {

/// Flat storage for named parameter blocks. Layout is a list of
/// (name, shape) segments over one contiguous array of doubles.
class ParamVector {
public:
    struct Segment {
        std::string name;
        std::vector<std::size_t> shape;
        std::size_t offset = 0;
        std::size_t size = 0;
    };

    ParamVector() = default;

    std::span<double> add_segment(std::string name, std::vector<std::size_t> shape) {
        for (const auto& s : segments_) {
            if (s.name == name) {
                throw std::invalid_argument("ParamVector: duplicate segment name: " + name);
            }
        }
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        Segment seg;
        seg.name = std::move(name);
        seg.shape = std::move(shape);
        seg.offset = values_.size();
        seg.size = n;
        values_.resize(values_.size() + n, 0.0);
        segments_.push_back(std::move(seg));
        return segment(segments_.back().name);
    }

    std::span<double> segment(const std::string& name) {
        const Segment& s = find(name);
        return {values_.data() + s.offset, s.size};
    }
    std::span<const double> segment(const std::string& name) const {
        const Segment& s = find(name);
        return {values_.data() + s.offset, s.size};
    }

    const std::vector<Segment>& segments() const { return segments_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Same layout, all values zero.
    static ParamVector zeros_like(const ParamVector& other) {
        ParamVector out;
        out.segments_ = other.segments_;
        out.values_.assign(other.values_.size(), 0.0);
        return out;
    }

    void fill(double v) { values_.assign(values_.size(), v); }

    bool same_layout(const ParamVector& other) const {
        if (segments_.size() != other.segments_.size()) return false;
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            if (segments_[i].name != other.segments_[i].name ||
                segments_[i].size != other.segments_[i].size) {
                return false;
            }
        }
        return true;
    }

    /// this += a * x. Layouts must match.
    void axpy(double a, const ParamVector& x) {
        if (x.size() != size()) throw std::invalid_argument("ParamVector::axpy: size mismatch");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
    }

    double dot(const ParamVector& x) const {
        if (x.size() != size()) throw std::invalid_argument("ParamVector::dot: size mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) acc += values_[i] * x.values_[i];
        return acc;
    }

private:
    const Segment& find(const std::string& name) const {
        for (const auto& s : segments_) {
            if (s.name == name) return s;
        }
        throw std::out_of_range("ParamVector: no segment named " + name);
    }

    std::vector<double> values_;
    std::vector<Segment> segments_;
};

}  // namespace figar
