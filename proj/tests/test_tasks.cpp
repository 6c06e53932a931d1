#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "qres/io.hpp"
#include "qres/tasks.hpp"

using namespace qres;

namespace {

// Direct transcription with an explicit y history, y_0..y_9 = 0.
std::vector<double> narma_oracle(const std::vector<double>& s) {
  std::vector<double> y(s.size() + 1, 0.0);
  for (std::size_t t = 0; t < s.size(); ++t) {
    double window = 0;
    for (int d = 0; d < 10; ++d)
      if (t >= static_cast<std::size_t>(d)) window += y[t - d];
    const double lag = t >= 9 ? s[t - 9] : 0.0;
    y[t + 1] = t < 9 ? 0.0 : 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * s[t] * lag + 0.1;
  }
  return {y.begin() + 1, y.end()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qres_test_tasks_" + name);
}

}  // namespace

TEST_CASE("NARMA10 settles on the smaller fixed point for zero input") {
  const auto task = narma10_from_inputs(std::vector<double>(300, 0.0));
  const double root = 0.7 - std::sqrt(0.49 - 0.2);
  CHECK(std::abs(root - 0.16148) < 1e-5);
  CHECK(std::abs(task.targets.back() - root) < 1e-10);
}

TEST_CASE("NARMA10 matches a literal recursion") {
  const auto s = draw_narma_inputs(500, 4);
  const auto task = narma10_from_inputs(s);
  const auto ref = narma_oracle(s);
  REQUIRE(task.targets.size() == ref.size());
  for (std::size_t t = 9; t < ref.size(); ++t) CHECK(std::abs(task.targets[t] - ref[t]) < 1e-14);
}

TEST_CASE("NARMA10 with maximal constant input stays bounded") {
  const auto task = narma10_from_inputs(std::vector<double>(10000, 0.2));
  for (double y : task.targets) CHECK_MESSAGE(y < 1.0, y);
}

TEST_CASE("NARMA10 generation is deterministic and prefix consistent") {
  const auto a = generate_narma10(1000, 17);
  const auto b = generate_narma10(1000, 17);
  CHECK(a.inputs == b.inputs);
  CHECK(a.targets == b.targets);
  const auto prefix = generate_narma10(200, 17);
  CHECK(std::equal(prefix.inputs.begin(), prefix.inputs.end(), a.inputs.begin()));
  CHECK(std::equal(prefix.targets.begin(), prefix.targets.end(), a.targets.begin()));
  CHECK(draw_narma_inputs(5, 17) == std::vector<double>(a.inputs.begin(), a.inputs.begin() + 5));
  CHECK(draw_narma_inputs(0, 17).empty());
  for (double s : a.inputs) {
    CHECK(s >= 0.0);
    CHECK(s <= 0.2);
  }
  CHECK_THROWS_AS(generate_narma10(11, 0), ValidationError);
  CHECK_THROWS_AS(narma10_from_inputs({0.1, 1.3}), DomainError);
}

TEST_CASE("NARMA10 stays in (0, 1) over a long random run") {
  const auto task = generate_narma10(1000000, 99);
  double lo = 1, hi = 0;
  for (std::size_t t = 9; t < task.targets.size(); ++t) {
    lo = std::min(lo, task.targets[t]);
    hi = std::max(hi, task.targets[t]);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("sliding-window features") {
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  const auto one = lr_features(s, 1);
  CHECK(one.first_t == 0);
  CHECK(one.values.rows() == 4);
  CHECK(one.values(2, 0) == 0.3);

  const auto three = lr_features(s, 3);
  CHECK(three.first_t == 2);
  REQUIRE(three.values.rows() == 2);
  CHECK(three.values.row(0) == Eigen::RowVector3d(0.3, 0.2, 0.1));
  CHECK(three.values.row(1) == Eigen::RowVector3d(0.4, 0.3, 0.2));

  const auto inputs = draw_narma_inputs(5000, 1);
  const auto big = lr_features(inputs, 30);
  CHECK(big.values.rows() == 4971);
  CHECK(big.values.cols() == 30);
  for (Eigen::Index r = 0; r < big.values.rows(); r += 97)
    for (int k = 0; k < 30; ++k) CHECK(big.values(r, k) == inputs[static_cast<std::size_t>(r + 29 - k)]);

  CHECK_THROWS_AS(lr_features(s, 0), ValidationError);
  CHECK_THROWS_AS(lr_features(s, 5), ValidationError);
}

TEST_CASE("split examples") {
  const auto a = split(5000, {});
  CHECK(a.washout == IndexRange{0, 500});
  CHECK(a.train == IndexRange{500, 4000});
  CHECK(a.test == IndexRange{4000, 5000});
  const auto b = split(100, {});
  CHECK(b.washout.size() == 10);
  CHECK(b.train.size() == 70);
  CHECK(b.test.size() == 20);
  const auto c = split(10, {0.0, 1.0, 0.0});
  CHECK(c.washout.size() == 0);
  CHECK(c.train == IndexRange{0, 10});
  CHECK(c.test.size() == 0);

  CHECK_THROWS_AS(split(5, {}), ValidationError);
  CHECK_THROWS_AS(split(100, {0.1, 0.7, 0.3}), ValidationError);
  CHECK_THROWS_AS(split(100, {0.5, 0.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(split(100, {-0.1, 0.9, 0.2}), ValidationError);
}

TEST_CASE("split partitions every row exactly once") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> rows(20, 20000);
  for (int rep = 0; rep < 200; ++rep) {
    const auto n = rows(rng);
    const auto r = split(n, {});
    CHECK(r.washout.begin == 0);
    CHECK(r.washout.end == r.train.begin);
    CHECK(r.train.end == r.test.begin);
    CHECK(r.test.end == n);
    CHECK(r.washout.size() == n / 10);
    CHECK(r.train.size() == n * 7 / 10);
  }
}

TEST_CASE("task CSV round trip") {
  const auto path = temp_path("roundtrip.csv");
  const auto task = generate_narma10(100, 5);
  write_task_csv(path, task);
  const auto rows = read_csv(path);
  REQUIRE(rows.size() == 101);
  CHECK(rows[0] == std::vector<std::string>{"t", "s", "y"});
  const auto back = read_task_csv(path);
  CHECK(back.inputs == task.inputs);
  CHECK(back.targets == task.targets);
  std::filesystem::remove(path);

  const auto bad = temp_path("bad.csv");
  {
    std::ofstream out(bad);
    out << "t,s,y\n0,abc,0.1\n";
  }
  CHECK_THROWS_AS(read_task_csv(bad), ValidationError);
  std::filesystem::remove(bad);
}
