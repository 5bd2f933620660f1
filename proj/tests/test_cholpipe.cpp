#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "covcast/cholpipe.hpp"
#include "covcast/errors.hpp"
#include "covcast/estimators.hpp"
#include "covcast/forecasters.hpp"
#include "covcast/rng.hpp"

using namespace covcast;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            x(i, j) = 0.02 * rng.normal();
        }
    }
    return x;
}

ReturnsMatrix as_returns(const MatrixXd& values)
{
    ReturnsMatrix r;
    r.values = values;
    for (Eigen::Index t = 0; t < values.rows(); ++t) {
        r.dates.push_back(parse_date("2020-01-01") + std::chrono::days(t));
    }
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        r.assets.push_back("A" + std::to_string(j));
    }
    return r;
}

} // namespace

TEST_CASE("Cholesky factors")
{
    CHECK(cholesky(MatrixXd::Identity(3, 3)) == MatrixXd::Identity(3, 3));

    MatrixXd a(2, 2);
    a << 4, 2, 2, 3;
    const MatrixXd l = cholesky(a);
    CHECK(l(0, 0) == doctest::Approx(2.0));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == doctest::Approx(1.0));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK((l * l.transpose() - a).norm() <= 1e-14);

    CHECK(cholesky(MatrixXd::Zero(3, 3)).isZero(0.0));
}

TEST_CASE("rank-deficient covariance still factorizes")
{
    const MatrixXd x = gaussian(3, 6, 1);
    const MatrixXd s = sample_cov(x);
    const MatrixXd l = cholesky(s);
    CHECK((l * l.transpose() - s).norm() <= 1e-10 * s.norm());
    CHECK(l.isLowerTriangular());
    CHECK((l.diagonal().array() >= 0.0).all());
}

TEST_CASE("indefinite input is rejected")
{
    MatrixXd m(2, 2);
    m << 1, 3, 3, 1;
    CHECK_THROWS_AS(cholesky(m), RunError);
}

TEST_CASE("factor index map is row-major lower triangle")
{
    const auto map = factor_index_map(2);
    REQUIRE(map.size() == 3);
    CHECK(map[0] == FactorPosition{0, 0});
    CHECK(map[1] == FactorPosition{1, 0});
    CHECK(map[2] == FactorPosition{1, 1});
    CHECK(factor_count(20) == 210);
    CHECK(assets_for_factor_count(210) == 20);
    CHECK_THROWS_AS(assets_for_factor_count(4), std::invalid_argument);
}

TEST_CASE("reconstruct")
{
    const VectorXd id = flatten_factor(MatrixXd::Identity(3, 3));
    CHECK(reconstruct(id) == MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(reconstruct(VectorXd::Zero(4)), std::invalid_argument);

    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        VectorXd v(10);
        for (int i = 0; i < 10; ++i) {
            v(i) = rng.normal();
        }
        const MatrixXd c = reconstruct(v);
        CHECK(c == c.transpose());
        CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(c).eigenvalues().minCoeff() >=
              -1e-12 * c.diagonal().maxCoeff());
    }
}

TEST_CASE("constant returns give an all-zero factor series")
{
    const FactorSeries fs = build_factor_series(as_returns(MatrixXd::Constant(40, 3, 0.01)), {});
    CHECK(fs.entries.isZero(1e-15));
    CHECK(fs.entries.cols() == 6);
}

TEST_CASE("factor series rows reconstruct the rolling covariance")
{
    const MatrixXd x = gaussian(90, 4, 5);
    EstimatorSpec spec;
    spec.window = 30;
    const FactorSeries fs = build_factor_series(as_returns(x), spec);
    REQUIRE(fs.length() == 61);
    CHECK(fs.n_assets() == 4);
    CHECK(fs.dates.front() == as_returns(x).dates[29]);
    for (Eigen::Index s = 0; s < fs.entries.rows(); ++s) {
        const MatrixXd direct = sample_cov(x.middleRows(s, 30));
        const MatrixXd back = reconstruct(fs.entries.row(s).transpose());
        CHECK((back - direct).norm() <= 1e-10 * direct.norm());
    }
    for (const auto& pos : factor_index_map(4)) {
        if (pos.row == pos.col) {
            const auto col = static_cast<Eigen::Index>(pos.row * (pos.row + 1) / 2 + pos.col);
            CHECK((fs.entries.col(col).array() >= 0.0).all());
        }
    }
    CHECK_THROWS_AS(build_factor_series(as_returns(x.topRows(30)), spec), std::invalid_argument);
}

TEST_CASE("parallel factor series equals the serial reference bitwise")
{
    const MatrixXd x = gaussian(150, 6, 8);
    EstimatorSpec spec;
    spec.window = 40;
    const auto r = as_returns(x);
    CHECK(build_factor_series(r, spec).entries == build_factor_series_serial(r, spec).entries);
    spec.kind = EstimatorKind::Ewma;
    spec.window = 20;
    CHECK(build_factor_series(r, spec).entries == build_factor_series_serial(r, spec).entries);
}

TEST_CASE("persistence forecast round-trips the last covariance")
{
    const MatrixXd x = gaussian(60, 3, 9);
    EstimatorSpec spec;
    spec.window = 20;
    const FactorSeries fs = build_factor_series(as_returns(x), spec);
    const MatrixXd last = sample_cov(x.bottomRows(20));
    const MatrixXd back = reconstruct(persistence_forecast(fs.entries));
    CHECK((back - last).norm() <= 1e-10 * last.norm());
}

TEST_CASE("factor series CSV header")
{
    const FactorSeries fs = build_factor_series(as_returns(gaussian(12, 2, 1)), EstimatorSpec{.window = 10});
    const std::string csv = factor_series_csv(fs);
    CHECK(csv.rfind("date,L_0_0,L_1_0,L_1_1\n", 0) == 0);
}
