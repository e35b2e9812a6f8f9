#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "angles.hpp"
#include "metrics.hpp"
#include "state.hpp"

namespace sppkit {

// Membership predicates over swarm states. Comparisons carry a 1e-9 rad
// tolerance so boundary cases are stable under replay.
class TargetSet {
  public:
    enum class Kind {
        order_box,    // max_i |heading_i| <= width / 2
        ordered,      // order parameter >= 1 - level
        disordered,   // order parameter <= level
        span_below,   // heading span < arc
        span_at_least // heading span >= arc
    };

    static TargetSet order_box(double width) { return make(Kind::order_box, width, 0.0, two_pi, "order_box width"); }
    static TargetSet ordered(double level) { return make(Kind::ordered, level, 0.0, 1.0, "ordered level"); }
    static TargetSet disordered(double level) { return make(Kind::disordered, level, 0.0, 1.0, "disordered level"); }
    static TargetSet span_below(double arc) { return make(Kind::span_below, arc, 0.0, two_pi, "span_below arc"); }
    static TargetSet span_at_least(double arc) { return make(Kind::span_at_least, arc, 0.0, two_pi, "span_at_least arc"); }

    Kind kind() const { return kind_; }
    double param() const { return param_; }

    // The scalar statistic the predicate tests.
    double measure(const SwarmState& s) const {
        switch (kind_) {
        case Kind::order_box: {
            double m = 0.0;
            for (double h : s.headings) m = std::max(m, std::abs(h));
            return m;
        }
        case Kind::ordered:
        case Kind::disordered:
            return order_parameter(s.headings);
        case Kind::span_below:
        case Kind::span_at_least:
            return heading_span(s.headings);
        }
        return 0.0;
    }

    bool contains(const SwarmState& s) const {
        constexpr double tol = 1e-9;
        const double m = measure(s);
        switch (kind_) {
        case Kind::order_box:
            return m <= param_ / 2.0 + tol;
        case Kind::ordered:
            return m >= 1.0 - param_ - tol;
        case Kind::disordered:
            return m <= param_ + tol;
        case Kind::span_below:
            return m < param_ + tol;
        case Kind::span_at_least:
            return m >= param_ - tol;
        }
        return false;
    }

    std::string describe() const {
        std::ostringstream os;
        switch (kind_) {
        case Kind::order_box:
            os << "max|heading| <= " << param_ / 2.0;
            break;
        case Kind::ordered:
            os << "order_parameter >= " << 1.0 - param_;
            break;
        case Kind::disordered:
            os << "order_parameter <= " << param_;
            break;
        case Kind::span_below:
            os << "heading_span < " << param_;
            break;
        case Kind::span_at_least:
            os << "heading_span >= " << param_;
            break;
        }
        return os.str();
    }

  private:
    static TargetSet make(Kind k, double p, double lo, double hi, const char* what) {
        if (!(p > lo && p < hi)) {
            std::ostringstream os;
            os << "target set: " << what << " must lie in (" << lo << ", " << hi << ")";
            throw std::invalid_argument(os.str());
        }
        TargetSet t;
        t.kind_ = k;
        t.param_ = p;
        return t;
    }

    Kind kind_ = Kind::order_box;
    double param_ = 1.0;
};

} // namespace sppkit
