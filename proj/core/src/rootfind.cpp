#include "chainres/rootfind.hpp"

#include "chainres/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace chainres {

double Rect::diameter() const { return std::hypot(width(), height()); }

Rect Rect::inflated(double factor) const {
    const double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
    const cplx c = center();
    return {c.real() - hw, c.real() + hw, c.imag() - hh, c.imag() + hh};
}

std::optional<StripBounds> strip_bounds(const TrigPoly& poly, bool real_positive_contrast) {
    const auto terms = poly.terms();
    if (terms.size() < 2) return std::nullopt;
    constexpr double margin = 0.1;
    const std::size_t n = terms.size();

    // Im k -> -infinity: the largest exponent dominates.
    double below = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) below += std::abs(terms[j].coeff);
    const double lower_gap = terms[n - 1].exponent - terms[n - 2].exponent;
    const double lower = std::min(0.0, -std::log(below / std::abs(terms[n - 1].coeff)) / lower_gap);

    double upper = 0.0;
    if (!real_positive_contrast) {
        double above = 0.0;
        for (std::size_t j = 1; j < n; ++j) above += std::abs(terms[j].coeff);
        const double upper_gap = terms[1].exponent - terms[0].exponent;
        upper = std::max(0.0, std::log(above / std::abs(terms[0].coeff)) / upper_gap);
    }
    return StripBounds{lower - margin, upper + margin};
}

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double half_pi = 0.5 * std::numbers::pi;
constexpr std::size_t max_samples_per_edge = std::size_t{1} << 20;
constexpr int max_bisection_depth = 44;
constexpr double boundary_floor = 1e-8;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct Sample {
    cplx f;
    double rate; // |f'/f|, 0 when no derivative is available
};

struct EdgeScan {
    double phase = 0.0;
    double max_abs = 0.0;
    bool singular = false; // a zero sits on (or numerically on) the segment
};

class PhaseTracker {
public:
    PhaseTracker(const AnalyticFn* f, const AnalyticFnWithDerivative* fd, double bandwidth)
        : f_(f), fd_(fd), bandwidth_(std::max(bandwidth, 1e-3)) {}

    Sample sample(cplx z) {
        ++count_;
        if (count_ > max_samples_per_edge) throw NumericalFailure("phase tracking exceeded 2^20 samples on one edge");
        Sample s{};
        if (fd_) {
            const ValueWithDerivative v = (*fd_)(z);
            s.f = v.value;
            s.rate = std::abs(v.value) > 0.0 ? std::abs(v.d_dk) / std::abs(v.value) : INFINITY;
            if (!finite(v.d_dk)) throw NumericalFailure("non-finite derivative on the contour");
        } else {
            s.f = (*f_)(z);
            s.rate = 0.0;
        }
        if (!finite(s.f)) throw NumericalFailure("non-finite function value on the contour");
        return s;
    }

    EdgeScan scan(cplx a, cplx b, double density) {
        count_ = 0;
        const double len = std::abs(b - a);
        const std::size_t n = 16 + static_cast<std::size_t>(std::ceil(2.0 * density * bandwidth_ * len));
        EdgeScan out;
        cplx z0 = a;
        Sample s0 = sample(z0);
        out.max_abs = std::abs(s0.f);
        for (std::size_t i = 1; i <= n; ++i) {
            const cplx z1 = (i == n) ? b : a + (b - a) * (static_cast<double>(i) / static_cast<double>(n));
            const Sample s1 = sample(z1);
            out.max_abs = std::max(out.max_abs, std::abs(s1.f));
            double min_abs = std::min(std::abs(s0.f), std::abs(s1.f));
            const double local = std::max(std::abs(s0.f), std::abs(s1.f));
            bool stuck = false;
            out.phase += refine(z0, s0, z1, s1, 0, min_abs, stuck, out.max_abs);
            if (stuck || min_abs < boundary_floor * local) out.singular = true;
            z0 = z1;
            s0 = s1;
        }
        return out;
    }

private:
    double refine(cplx z0, const Sample& s0, cplx z1, const Sample& s1, int depth, double& min_abs, bool& stuck,
                  double& max_abs) {
        if (s0.f == 0.0 || s1.f == 0.0) {
            stuck = true;
            return 0.0;
        }
        const double d = std::arg(s1.f / s0.f);
        const double h = std::abs(z1 - z0);
        const bool fast = std::max(s0.rate, s1.rate) * h > half_pi;
        if (std::abs(d) < half_pi && !fast) return d;
        if (depth >= max_bisection_depth) {
            stuck = true;
            return d;
        }
        const cplx zm = 0.5 * (z0 + z1);
        const Sample sm = sample(zm);
        min_abs = std::min(min_abs, std::abs(sm.f));
        max_abs = std::max(max_abs, std::abs(sm.f));
        return refine(z0, s0, zm, sm, depth + 1, min_abs, stuck, max_abs) +
               refine(zm, sm, z1, s1, depth + 1, min_abs, stuck, max_abs);
    }

    const AnalyticFn* f_;
    const AnalyticFnWithDerivative* fd_;
    double bandwidth_;
    std::size_t count_ = 0;
};

struct Edge {
    double phase;
    double max_abs;
};

// Edges traversed counterclockwise: bottom x1->x2, right y1->y2, top x2->x1, left y2->y1.
struct Box {
    Rect r;
    Edge bottom, right, top, left;
    int winding;

    double scale() const { return std::max({bottom.max_abs, right.max_abs, top.max_abs, left.max_abs}); }
};

Edge reversed(const Edge& e) { return {-e.phase, e.max_abs}; }

double raw_winding(const Edge& b, const Edge& r, const Edge& t, const Edge& l) {
    return (b.phase + r.phase + t.phase + l.phase) / two_pi;
}

bool near_integer(double w) { return std::abs(w - std::round(w)) < 0.25; }

// Scan the outer rectangle, shifting any edge that runs through a zero.
Box outer_box(PhaseTracker& tracker, Rect r) {
    constexpr double shift = 1e-4;
    constexpr int retries = 8;
    for (double density = 1.0; density <= 16.0; density *= 2.0) {
        Rect cur = r;
        for (int attempt = 0;; ++attempt) {
            const EdgeScan b = tracker.scan({cur.x1, cur.y1}, {cur.x2, cur.y1}, density);
            const EdgeScan rt = tracker.scan({cur.x2, cur.y1}, {cur.x2, cur.y2}, density);
            const EdgeScan t = tracker.scan({cur.x2, cur.y2}, {cur.x1, cur.y2}, density);
            const EdgeScan l = tracker.scan({cur.x1, cur.y2}, {cur.x1, cur.y1}, density);
            if (!(b.singular || rt.singular || t.singular || l.singular)) {
                Box box{cur, {b.phase, b.max_abs}, {rt.phase, rt.max_abs}, {t.phase, t.max_abs}, {l.phase, l.max_abs}, 0};
                const double w = raw_winding(box.bottom, box.right, box.top, box.left);
                if (near_integer(w)) {
                    box.winding = static_cast<int>(std::lround(w));
                    if (box.winding < 0) throw NumericalFailure("negative winding number");
                    return box;
                }
                break; // retry with denser sampling
            }
            if (attempt == retries) throw NumericalFailure("zero on the search contour persists after 8 shifts");
            if (b.singular) cur.y1 -= shift;
            if (rt.singular) cur.x2 += shift;
            if (t.singular) cur.y2 += shift;
            if (l.singular) cur.x1 -= shift;
        }
    }
    throw NumericalFailure("winding number did not settle to an integer");
}

struct Outcome {
    std::vector<Box> children;
    std::vector<ZeroRecord> records;
};

class Subdivider {
public:
    Subdivider(const AnalyticFnWithDerivative& f, const FindOptions& o) : f_(f), o_(o) {}

    Outcome process(const Box& box) const {
        Outcome out;
        if (box.winding == 0) return out;
        if (box.winding == 1) {
            if (auto rec = newton(box)) {
                out.records.push_back(*rec);
                return out;
            }
        }
        if (box.r.diameter() <= o_.cluster_floor) {
            const cplx c = box.r.center();
            out.records.push_back({c, box.winding, std::abs(f_(c).value), 0.5 * box.r.diameter()});
            return out;
        }
        out.children = split(box);
        return out;
    }

private:
    std::optional<ZeroRecord> newton(const Box& box) const {
        const Rect fence = box.r.inflated(1.5);
        cplx k = box.r.center();
        int polish = -1;
        for (int it = 0; it < 80; ++it) {
            const ValueWithDerivative v = f_(k);
            if (v.d_dk == 0.0 || !finite(v.d_dk) || !finite(v.value)) return std::nullopt;
            const cplx step = v.value / v.d_dk;
            k -= step;
            if (!fence.contains(k)) return std::nullopt;
            if (polish < 0 && std::abs(step) <= 1e-13 * std::max(1.0, std::abs(k))) polish = 2;
            if (polish >= 0 && polish-- == 0) break;
        }
        if (polish >= 0 || !box.r.contains(k)) return std::nullopt;
        const ValueWithDerivative v = f_(k);
        const double residual = std::abs(v.value);
        if (residual > o_.tol * box.scale() || std::abs(v.d_dk) == 0.0) return std::nullopt;
        return ZeroRecord{k, 1, residual, 0.0};
    }

    std::vector<Box> split(const Box& box) const {
        static constexpr double fractions[] = {0.5, 0.5731, 0.4387, 0.6427, 0.3519, 0.5213};
        const bool vertical = box.r.width() >= box.r.height();
        for (double density = 1.0; density <= 8.0; density *= 2.0) {
            for (double frac : fractions) {
                PhaseTracker tracker(nullptr, &f_, o_.bandwidth);
                auto children = vertical ? split_vertical(tracker, box, frac, density)
                                         : split_horizontal(tracker, box, frac, density);
                if (children) return *children;
            }
        }
        throw NumericalFailure("could not subdivide a box consistently (winding additivity failed)");
    }

    static bool consistent(const Edge& parent, const EdgeScan& a, const EdgeScan& b) {
        return std::abs(a.phase + b.phase - parent.phase) < 0.5;
    }

    static std::optional<std::vector<Box>> finish(const Box& parent, Box lo, Box hi) {
        const double wl = raw_winding(lo.bottom, lo.right, lo.top, lo.left);
        const double wh = raw_winding(hi.bottom, hi.right, hi.top, hi.left);
        if (!near_integer(wl) || !near_integer(wh)) return std::nullopt;
        lo.winding = static_cast<int>(std::lround(wl));
        hi.winding = static_cast<int>(std::lround(wh));
        if (lo.winding < 0 || hi.winding < 0 || lo.winding + hi.winding != parent.winding) return std::nullopt;
        std::vector<Box> out;
        if (lo.winding > 0) out.push_back(lo);
        if (hi.winding > 0) out.push_back(hi);
        return out;
    }

    std::optional<std::vector<Box>> split_vertical(PhaseTracker& tr, const Box& p, double frac, double density) const {
        const Rect& r = p.r;
        const double xm = r.x1 + frac * r.width();
        const EdgeScan mid = tr.scan({xm, r.y1}, {xm, r.y2}, density);
        if (mid.singular) return std::nullopt;
        const EdgeScan bl = tr.scan({r.x1, r.y1}, {xm, r.y1}, density);
        const EdgeScan br = tr.scan({xm, r.y1}, {r.x2, r.y1}, density);
        const EdgeScan tr_ = tr.scan({r.x2, r.y2}, {xm, r.y2}, density);
        const EdgeScan tl = tr.scan({xm, r.y2}, {r.x1, r.y2}, density);
        if (!consistent(p.bottom, bl, br) || !consistent(p.top, tr_, tl)) return std::nullopt;
        const Edge m{mid.phase, mid.max_abs};
        Box lo{{r.x1, xm, r.y1, r.y2}, {bl.phase, bl.max_abs}, m, {tl.phase, tl.max_abs}, p.left, 0};
        Box hi{{xm, r.x2, r.y1, r.y2}, {br.phase, br.max_abs}, p.right, {tr_.phase, tr_.max_abs}, reversed(m), 0};
        return finish(p, lo, hi);
    }

    std::optional<std::vector<Box>> split_horizontal(PhaseTracker& tr, const Box& p, double frac,
                                                     double density) const {
        const Rect& r = p.r;
        const double ym = r.y1 + frac * r.height();
        const EdgeScan mid = tr.scan({r.x1, ym}, {r.x2, ym}, density);
        if (mid.singular) return std::nullopt;
        const EdgeScan rb = tr.scan({r.x2, r.y1}, {r.x2, ym}, density);
        const EdgeScan rt = tr.scan({r.x2, ym}, {r.x2, r.y2}, density);
        const EdgeScan lt = tr.scan({r.x1, r.y2}, {r.x1, ym}, density);
        const EdgeScan lb = tr.scan({r.x1, ym}, {r.x1, r.y1}, density);
        if (!consistent(p.right, rb, rt) || !consistent(p.left, lt, lb)) return std::nullopt;
        const Edge m{mid.phase, mid.max_abs};
        Box lo{{r.x1, r.x2, r.y1, ym}, p.bottom, {rb.phase, rb.max_abs}, reversed(m), {lb.phase, lb.max_abs}, 0};
        Box hi{{r.x1, r.x2, ym, r.y2}, m, {rt.phase, rt.max_abs}, p.top, {lt.phase, lt.max_abs}, 0};
        return finish(p, lo, hi);
    }

    const AnalyticFnWithDerivative& f_;
    const FindOptions& o_;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void check_rect(const Rect& r) {
    if (!(r.x1 < r.x2) || !(r.y1 < r.y2) || !std::isfinite(r.x1) || !std::isfinite(r.x2) ||
        !std::isfinite(r.y1) || !std::isfinite(r.y2)) {
        throw InvalidInput("rectangle needs finite x1 < x2 and y1 < y2");
    }
}

} // namespace

WindingCount count_zeros(const AnalyticFn& f, const Rect& rect, double bandwidth) {
    check_rect(rect);
    PhaseTracker tracker(&f, nullptr, bandwidth);
    const Box box = outer_box(tracker, rect);
    return {box.winding, box.r};
}

SpectrumResult find_zeros(const AnalyticFnWithDerivative& f, const Rect& rect, const FindOptions& options) {
    check_rect(rect);
    if (!(options.cluster_floor > 0.0) || !(options.tol > 0.0)) {
        throw InvalidInput("tol and cluster floor must be positive");
    }
    PhaseTracker tracker(nullptr, &f, options.bandwidth);
    const Box root = outer_box(tracker, rect);

    SpectrumResult result;
    result.search_rect = root.r;
    result.total_winding = root.winding;

    Subdivider sub(f, options);
    std::vector<Box> frontier{root};
    constexpr std::size_t max_frontier = std::size_t{1} << 22;
    while (!frontier.empty()) {
        std::vector<Outcome> outcomes(frontier.size());
        parallel_for(frontier.size(), options.threads, [&](std::size_t i) { outcomes[i] = sub.process(frontier[i]); });
        std::vector<Box> next;
        for (auto& o : outcomes) {
            next.insert(next.end(), o.children.begin(), o.children.end());
            result.zeros.insert(result.zeros.end(), o.records.begin(), o.records.end());
        }
        if (next.size() > max_frontier) throw NumericalFailure("subdivision frontier grew without bound");
        frontier.swap(next);
    }

    std::sort(result.zeros.begin(), result.zeros.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
        if (a.k.real() != b.k.real()) return a.k.real() < b.k.real();
        return a.k.imag() < b.k.imag();
    });
    int total = 0;
    for (const auto& z : result.zeros) total += z.multiplicity;
    if (total != result.total_winding) throw NumericalFailure("multiplicities do not add up to the winding number");
    return result;
}

cplx newton_refine(const AnalyticFnWithDerivative& f, cplx seed, double reach) {
    cplx k = seed;
    int polish = -1;
    for (int it = 0; it < 100; ++it) {
        const ValueWithDerivative v = f(k);
        if (v.value == 0.0) return k;
        if (v.d_dk == 0.0 || !finite(v.d_dk) || !finite(v.value)) break;
        const cplx step = v.value / v.d_dk;
        k -= step;
        if (std::abs(k - seed) > reach) throw NumericalFailure("Newton iteration left its search disk");
        if (polish < 0 && std::abs(step) <= 1e-13 * std::max(1.0, std::abs(k))) polish = 2;
        if (polish >= 0 && polish-- == 0) return k;
    }
    throw NumericalFailure("Newton iteration did not converge");
}

bool divides(double t, double k0) {
    const double q = t * k0 / std::numbers::pi;
    return std::abs(q - std::round(q)) <= 1e-9 * (1.0 + std::abs(q));
}

int e_multiplicity(double k0, const ParamVector& params) {
    int n = 0;
    for (double t : params.t)
        if (divides(t, k0)) ++n;
    return n;
}

ClusterReport cluster_counts(const SpectrumResult& result, const ParamVector& params, double radius) {
    const double x1 = result.search_rect.x1, x2 = result.search_rect.x2;
    std::vector<double> points;
    for (double t : params.t) {
        const double step = std::numbers::pi / t;
        for (double m = std::ceil(x1 / step); m * step < x2; m += 1.0) {
            if (m * step > x1) points.push_back(m * step);
        }
    }
    std::sort(points.begin(), points.end());
    std::vector<double> unique;
    for (double p : points) {
        if (unique.empty() || std::abs(p - unique.back()) > 1e-9 * (1.0 + std::abs(p))) unique.push_back(p);
    }

    ClusterReport report;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        const double k0 = unique[i];
        int found = 0;
        for (const auto& z : result.zeros)
            if (std::abs(z.k - cplx(k0, 0.0)) <= radius) found += z.multiplicity;
        report.points.push_back({k0, e_multiplicity(k0, params), found});
        if (i > 0 && unique[i] - unique[i - 1] < 2.0 * radius) report.overlapping = true;
    }
    return report;
}

DensityReport zero_density(const SpectrumResult& result, const ParamVector& params, cplx sigma) {
    int total = 0;
    for (const auto& z : result.zeros) total += z.multiplicity;
    DensityReport d;
    d.empirical = total / result.search_rect.width();
    d.theoretical = params.norm1() / std::numbers::pi;
    d.theoretical_applicable = sigma != cplx(1.0, 0.0);
    return d;
}

} // namespace chainres
