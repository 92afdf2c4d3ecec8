#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracgeo/experiments.hpp"

using namespace fracgeo;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is, "t.cfg");
}

std::string body(const Report& r) {
    std::ostringstream os;
    r.write_body(os);
    return os.str();
}

const std::string kSuite = R"(
experiment = equivalence_check
spacing = 0.1
seed = 3
random_fields = 2
shape.id = disk
shape.kind = ball
shape.center = 0 0
shape.radius = 0.4
shape.id = box
shape.kind = box
shape.lo = -0.3 -0.2
shape.hi = 0.3 0.4
shape.id = noise
shape.kind = box
shape.lo = -0.5 -0.5
shape.hi = 0.5 0.5
shape.field = random
)";

} // namespace

TEST(Experiments, DeterministicBody) {
    const auto cfg = parse(kSuite);
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    EXPECT_EQ(body(a), body(b));
    set_thread_count(3);
    const auto c = run_experiment(cfg);
    set_thread_count(1);
    EXPECT_EQ(body(a), body(c));
    auto other = cfg;
    other.seed = 4;
    EXPECT_NE(body(a), body(run_experiment(other)));
}

TEST(Experiments, RowsAreSortedAndFullyPopulated) {
    const auto rep = run_experiment(parse(kSuite));
    ASSERT_FALSE(rep.rows().empty());
    for (std::size_t i = 0; i < rep.rows().size(); ++i) {
        const auto& r = rep.rows()[i];
        EXPECT_EQ(r.experiment, "equivalence_check");
        EXPECT_EQ(r.delta, 0.5);
        EXPECT_EQ(r.q, 4.0 / 3.0);
        EXPECT_EQ(r.h, 0.1);
        EXPECT_FALSE(std::isnan(r.error_bound));
        if (i > 0) {
            const auto& p = rep.rows()[i - 1];
            EXPECT_LE(std::tie(p.shape_id, p.quantity), std::tie(r.shape_id, r.quantity));
        }
    }
    std::stringstream ss;
    rep.write_csv(ss);
    const auto back = Report::read_csv(ss);
    EXPECT_EQ(back.rows(), rep.rows());
}

TEST(Experiments, EquivalenceChecksPassAndConstantsAreOrdered) {
    const auto rep = run_experiment(parse(kSuite));
    EXPECT_FALSE(rep.any_failed());
    const double ca = rep.find("all", "C_A")->value, cb = rep.find("all", "C_B")->value,
                 cc = rep.find("all", "C_C")->value;
    for (double c : {ca, cb, cc}) {
        EXPECT_TRUE(std::isfinite(c));
        EXPECT_GT(c, 0);
    }
    // indicators are fields and the sets are compacts, so C_C <= C_A
    EXPECT_LE(cc, ca * (1 + 1e-12));
    int checks = 0;
    for (const auto& r : rep.rows())
        if (r.quantity.rfind("check_", 0) == 0) {
            ++checks;
            EXPECT_EQ(r.pass, PassFlag::Pass) << r.shape_id << " " << r.quantity;
        }
    EXPECT_GT(checks, 10);
    // the disk indicator is its own only level set
    EXPECT_NEAR(rep.find("disk", "check_c_implies_a")->value, 1.0, 1e-12);
}

TEST(Experiments, ScaledIndicatorsGiveTheSameRatio) {
    const auto rep = run_experiment(parse(kSuite));
    const double r1 = rep.find("disk", "lq_over_seminorm")->value;
    EXPECT_NEAR(rep.find("disk_x2", "lq_over_seminorm")->value, r1, 1e-13 * r1);
    EXPECT_NEAR(rep.find("disk_x5", "lq_over_seminorm")->value, r1, 1e-13 * r1);
}

TEST(Experiments, EmptyShapeGivesWarningRow) {
    const auto rep = run_experiment(parse(kSuite + R"(
shape.id = dust
shape.kind = ball
shape.center = 0.01 0.01
shape.radius = 0.001
)"));
    const auto* row = rep.find("dust", "empty_shape");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row->pass, PassFlag::Warn);
    EXPECT_FALSE(rep.any_failed());
}

TEST(Experiments, OneDimensionalTwoCellPerimeter) {
    const auto rep = run_experiment(parse(R"(
experiment = perimeter
dim = 1
spacing = 1
domain.kind = box
domain.lo = 0
domain.hi = 2
shape.id = left
shape.kind = box
shape.lo = 0
shape.hi = 1
)"));
    EXPECT_EQ(rep.find("left", "perimeter")->value,
              unit_pair_integral({1, 0}, 1, 0.5, KernelParams{}.subdivision_depth));
    EXPECT_NEAR(rep.find("left", "perimeter")->value, 4 * (2 - std::sqrt(2.0)), 1e-3);
    EXPECT_EQ(rep.find("left", "volume")->value, 1.0);
    EXPECT_EQ(rep.rows().front().q, 2.0);
}

TEST(Experiments, CoareaRowsPass) {
    const auto rep = run_experiment(parse(R"(
experiment = coarea_check
spacing = 0.05
seed = 11
shape.id = noise
shape.kind = box
shape.lo = -0.6 -0.6
shape.hi = 0.6 0.6
shape.field = random
shape.id = tent
shape.kind = ball
shape.center = 0 0
shape.radius = 0.5
shape.field = tent
)"));
    for (const char* id : {"noise", "tent"}) {
        const auto* gap = rep.find(id, "coarea_relative_gap");
        ASSERT_NE(gap, nullptr);
        EXPECT_LE(gap->value, 1e-10);
        EXPECT_EQ(gap->pass, PassFlag::Pass);
    }
}

TEST(Experiments, CapVsPerimeterDiskPasses) {
    const auto rep = run_experiment(parse(R"(
experiment = cap_vs_perimeter
spacing = 0.1
shape.id = disk
shape.kind = ball
shape.center = 0 0
shape.radius = 0.4
)"));
    const auto* row = rep.find("disk", "cap_over_two_perimeter");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row->pass, PassFlag::Pass);
    EXPECT_LE(rep.find("disk", "capacity")->value, rep.find("disk", "two_perimeter")->value * (1 + 1e-9));
}

TEST(Experiments, CapacityAgreesWithLp) {
    const auto rep = run_experiment(parse(R"(
experiment = capacity
spacing = 0.125
shape.id = disk
shape.kind = ball
shape.center = 0.1 0
shape.radius = 0.3
)"));
    const auto* gap = rep.find("disk", "lp_mincut_relative_gap");
    ASSERT_NE(gap, nullptr);
    EXPECT_EQ(gap->pass, PassFlag::Pass);
}

TEST(Experiments, IsoperimetricExponentIsExact) {
    const auto rep = run_experiment(parse(R"(
experiment = isoperimetric_scan
delta = 0.3
spacing = 0.1
shape.id = disk
shape.kind = ball
shape.center = 0 0
shape.radius = 0.5
shape.id = square
shape.kind = box
shape.lo = -0.4 -0.4
shape.hi = 0.4 0.4
)"));
    for (const char* id : {"disk", "square"}) {
        const auto* row = rep.find(id, "perimeter_exponent");
        ASSERT_NE(row, nullptr);
        EXPECT_NEAR(row->value, 1.7, 1e-9);
        EXPECT_EQ(row->pass, PassFlag::Pass);
    }
    EXPECT_EQ(std::count_if(rep.rows().begin(), rep.rows().end(),
                            [](const ReportRow& r) { return r.quantity == "iso_max_ratio"; }),
              1);
}

TEST(Experiments, SubSolverErrorsNameTheShape) {
    auto cfg = parse(R"(
experiment = cap_vs_perimeter
spacing = 0.1
shape.id = too_big
shape.kind = ball
shape.center = 0 0
shape.radius = 0.95
)");
    try {
        run_experiment(cfg);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("shape 'too_big': ", 0), 0u) << e.what();
    }
}
