#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "effham/errors.hpp"

namespace effham {

struct SchedulePoint {
    double s;
    double delta;  // transverse-field energy scale Delta(s)
    double eps;    // problem energy scale E(s)
};

struct ScheduleValue {
    double delta;
    double eps;
};

/// Tabulated annealing schedule (Delta(s), E(s)) on s in [0, 1] with
/// piecewise-linear interpolation between knots.
class Schedule {
public:
    explicit Schedule(std::vector<SchedulePoint> points) : points_(std::move(points)) {
        if (points_.size() < 2) throw ContractViolation("schedule needs at least two knots");
        if (points_.front().s != 0.0 || points_.back().s != 1.0)
            throw ContractViolation("schedule must start at s=0 and end at s=1");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (i > 0 && points_[i].s <= points_[i - 1].s)
                throw ContractViolation("schedule s values must be strictly increasing");
            if (points_[i].delta < 0.0 || points_[i].eps < 0.0)
                throw ContractViolation("schedule energies must be nonnegative");
        }
    }

    /// Interpolated (Delta, E) at s; exact at knots.
    ScheduleValue at(double s) const {
        if (!(s >= 0.0 && s <= 1.0))
            throw DomainError("schedule evaluated outside [0,1]: s = " + std::to_string(s));
        std::size_t lo = 0, hi = points_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (points_[mid].s <= s)
                lo = mid;
            else
                hi = mid;
        }
        if (points_[lo].s == s) return {points_[lo].delta, points_[lo].eps};
        if (points_[hi].s == s) return {points_[hi].delta, points_[hi].eps};
        const double t = (s - points_[lo].s) / (points_[hi].s - points_[lo].s);
        return {points_[lo].delta + t * (points_[hi].delta - points_[lo].delta),
                points_[lo].eps + t * (points_[hi].eps - points_[lo].eps)};
    }

    const std::vector<SchedulePoint>& points() const { return points_; }

    /// Synthetic test schedule Delta(s) = 10(1-s), E(s) = 10s. Not a hardware
    /// curve; real schedules load from CSV.
    static Schedule default_linear() { return Schedule({{0.0, 10.0, 0.0}, {1.0, 0.0, 10.0}}); }

    static Schedule load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open schedule file: " + path);
        std::string line;
        if (!std::getline(in, line)) throw ParseError("empty schedule file: " + path);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != "s,delta,eps")
            throw ParseError("schedule header must be \"s,delta,eps\", got \"" + line + "\"");
        std::vector<SchedulePoint> pts;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            SchedulePoint p{};
            char trail = 0;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &p.s, &p.delta, &p.eps, &trail) != 3)
                throw ParseError("bad schedule row at " + path + ":" + std::to_string(lineno) + ": " + line);
            pts.push_back(p);
        }
        return Schedule(std::move(pts));
    }

    void save_csv(std::ostream& out) const {
        out << "s,delta,eps\n";
        char buf[128];
        for (const SchedulePoint& p : points_) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.s, p.delta, p.eps);
            out << buf;
        }
    }

private:
    std::vector<SchedulePoint> points_;
};

inline ScheduleValue schedule_at(const Schedule& schedule, double s) { return schedule.at(s); }

}  // namespace effham
