#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "summation.hpp"

namespace fracgeo {

/// Piecewise-constant function on the G-cells, indexed by G-index.
class ScalarField {
public:
    explicit ScalarField(DomainPtr domain, double value = 0.0)
        : domain_(std::move(domain)), values_(domain_->g_count(), value) {}

    ScalarField(DomainPtr domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
        require(values_.size() == domain_->g_count(), "field needs one value per G-cell");
        for (double v : values_) require(std::isfinite(v), "field values must be finite");
    }

    static ScalarField indicator(const CellSet& a, double height = 1.0) {
        ScalarField f(a.domain());
        const auto cells = a.domain()->g_cells();
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (a.contains(static_cast<std::size_t>(cells[i]))) f.values_[i] = height;
        return f;
    }

    [[nodiscard]] const DomainPtr& domain() const noexcept { return domain_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] double& operator[](std::size_t i) { return values_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    /// Value at a linear cell index (0 outside G).
    [[nodiscard]] double at_cell(std::size_t cell) const {
        const auto g = domain_->g_index(cell);
        return g < 0 ? 0.0 : values_[static_cast<std::size_t>(g)];
    }

    ScalarField& operator+=(const ScalarField& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    ScalarField& operator*=(double c) {
        for (double& v : values_) v *= c;
        return *this;
    }
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double c, ScalarField a) { return a *= c; }

    [[nodiscard]] ScalarField abs() const {
        ScalarField out(*this);
        for (double& v : out.values_) v = std::abs(v);
        return out;
    }

    /// Cells with value >= t.
    [[nodiscard]] CellSet at_least(double t) const {
        CellSet s(domain_);
        const auto cells = domain_->g_cells();
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] >= t) s.insert(static_cast<std::size_t>(cells[i]));
        return s;
    }

    /// Cells with non-zero value.
    [[nodiscard]] CellSet support() const {
        CellSet s(domain_);
        const auto cells = domain_->g_cells();
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] != 0.0) s.insert(static_cast<std::size_t>(cells[i]));
        return s;
    }

private:
    void check_same(const ScalarField& o) const {
        if (o.domain_ != domain_) throw DomainMismatch();
    }

    DomainPtr domain_;
    std::vector<double> values_;
};

/// Seminorm value together with the certified effect of kernel truncation.
struct SeminormResult {
    double value = 0;
    /// Upper bound on (true - value) caused by dropped pairs; 0 without truncation.
    double truncation_bound = 0;
};

inline void check_domain(const DomainPtr& a, const KernelTable& k) {
    if (a != k.domain()) throw DomainMismatch();
}

/// Discrete |u|_{W^{delta,p}(G)} = (sum over ordered pairs w_ij |u_i - u_j|^p)^{1/p}.
/// The table holds unordered pairs, each counted twice.
inline SeminormResult seminorm_with_bound(const ScalarField& u, const KernelTable& kern, double p = 1.0) {
    require(p >= 1, "seminorm exponent p must be at least 1");
    check_domain(u.domain(), kern);
    const auto v = u.values();
    const bool linear = p == 1.0;
    const double power_sum = 2.0 * parallel_row_sum(v.size(), [&](std::size_t i) {
        CompensatedSum row;
        const double ui = v[i];
        kern.for_each_partner_above(i, [&](std::size_t j, double w) {
            const double diff = std::abs(ui - v[j]);
            if (diff != 0.0) row += w * (linear ? diff : std::pow(diff, p));
        });
        return row.value();
    });
    SeminormResult r;
    r.value = linear ? power_sum : std::pow(power_sum, 1.0 / p);
    if (kern.truncated()) {
        CompensatedSum mass;
        for (double x : v) mass += std::pow(std::abs(x), p);
        const double extra = std::pow(2.0, p - 1) * 2.0 * kern.tail_bound_per_cell() * mass.value();
        r.truncation_bound = linear ? extra : std::pow(power_sum + extra, 1.0 / p) - r.value;
    }
    return r;
}

inline double seminorm(const ScalarField& u, const KernelTable& kern, double p = 1.0) {
    return seminorm_with_bound(u, kern, p).value;
}

/// P_delta(A, G) = sum over i in A, j in G \ A of w_ij.
inline double perimeter(const CellSet& a, const KernelTable& kern) {
    check_domain(a.domain(), kern);
    const auto cells = a.domain()->g_cells();
    std::vector<std::uint8_t> in(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) in[i] = a.contains(static_cast<std::size_t>(cells[i]));
    return parallel_row_sum(cells.size(), [&](std::size_t i) {
        CompensatedSum row;
        const auto mi = in[i];
        kern.for_each_partner_above(i, [&](std::size_t j, double w) {
            if (in[j] != mi) row += w;
        });
        return row.value();
    });
}

/// Upper bound on the perimeter mass dropped by kernel truncation.
inline double perimeter_truncation_bound(const CellSet& a, const KernelTable& kern) {
    return static_cast<double>(a.count()) * kern.tail_bound_per_cell();
}

/// (sum_i |u_i|^q h^n)^{1/q}.
inline double lq_norm(const ScalarField& u, double q) {
    require(q >= 1, "norm exponent q must be at least 1");
    CompensatedSum s;
    for (double x : u.values())
        if (x != 0.0) s += std::pow(std::abs(x), q);
    return std::pow(s.value() * u.domain()->cell_volume(), 1.0 / q);
}

/// Super-level sets {u >= t_k} at the distinct positive values t_1 < ... < t_M.
struct LevelDecomposition {
    std::vector<double> thresholds;
    std::vector<CellSet> level_sets;
};

inline LevelDecomposition level_decompose(const ScalarField& u) {
    std::vector<double> ts;
    for (double x : u.values()) {
        require(x >= 0, "level decomposition needs a non-negative field");
        if (x > 0) ts.push_back(x);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    LevelDecomposition dec;
    dec.thresholds = ts;
    dec.level_sets.reserve(ts.size());
    for (double t : ts) dec.level_sets.push_back(u.at_least(t));
    return dec;
}

struct CoareaResult {
    double lhs = 0; ///< half the W^{delta,1} seminorm
    double rhs = 0; ///< layer-cake sum of level-set perimeters
    [[nodiscard]] double relative_gap() const {
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        return scale == 0 ? 0.0 : std::abs(lhs - rhs) / scale;
    }
};

/// Both sides of 1/2 |u|_{W^{delta,1}} = sum_k (t_k - t_{k-1}) P_delta({u >= t_k}).
inline CoareaResult coarea_check(const ScalarField& u, const KernelTable& kern) {
    const auto dec = level_decompose(u);
    CoareaResult r;
    r.lhs = 0.5 * seminorm(u, kern, 1.0);
    CompensatedSum rhs;
    double prev = 0.0;
    for (std::size_t k = 0; k < dec.thresholds.size(); ++k) {
        rhs += (dec.thresholds[k] - prev) * perimeter(dec.level_sets[k], kern);
        prev = dec.thresholds[k];
    }
    r.rhs = rhs.value();
    return r;
}

} // namespace fracgeo
