#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qkm/error.hpp"
#include "qkm/kernels.hpp"

using namespace qkm;
using namespace qkm::kernels;
using channels::ChannelKind;
using qsim::Circuit;
using qsim::Gate;
using qsim::Shots;

namespace {

constexpr double pi = std::numbers::pi;
const Shots exact = Shots::infinite();

double reference(OverlapMethod method, ChannelKind kind, double ti, double tj) {
  if (method == OverlapMethod::InversionTest) {
    const auto a = qsim::run_circuit(channels::build_channel_circuit(kind, ti));
    const auto b = qsim::run_circuit(channels::build_channel_circuit(kind, tj));
    return std::norm(a.inner(b));
  }
  return overlap_oracle(reduced_system_state(kind, ti), reduced_system_state(kind, tj));
}

double angle_max(ChannelKind kind) { return kind == ChannelKind::AmplitudeDamping ? pi : 2 * pi; }

const OverlapMethod kCircuits[] = {OverlapMethod::SwapTest, OverlapMethod::InversionTest,
                                   OverlapMethod::AncillaBased, OverlapMethod::BellBasis};

}  // namespace

TEST_CASE("overlap oracle examples") {
  const auto zero = qsim::DensityMatrix::from_pure(qsim::StateVector(1));
  const auto one = qsim::DensityMatrix::from_pure(qsim::run_circuit(Circuit(1).append(Gate::x(0))));
  CHECK(overlap_oracle(zero, zero) == doctest::Approx(1.0));
  CHECK(overlap_oracle(zero, one) == 0.0);
  CHECK(overlap_oracle(qsim::DensityMatrix::maximally_mixed(1), one) == doctest::Approx(0.5));
  CHECK_THROWS_AS(overlap_oracle(zero, qsim::DensityMatrix::maximally_mixed(2)), ContractViolation);
}

TEST_CASE("every circuit matches its reference in the exact limit") {
  std::mt19937_64 gen(31);
  for (auto kind : {ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping}) {
    std::uniform_real_distribution<double> u(0, angle_max(kind));
    for (int pair = 0; pair < 50; ++pair) {
      const double ti = u(gen), tj = u(gen);
      for (auto method : kCircuits) {
        CAPTURE(to_string(method));
        CHECK(std::abs(estimate_overlap(method, ti, tj, kind, exact, 0) - reference(method, kind, ti, tj)) <= 1e-10);
      }
      CHECK(std::abs(estimate_overlap(OverlapMethod::ExactOracle, ti, tj, kind, exact, 0) -
                     reference(OverlapMethod::SwapTest, kind, ti, tj)) <= 1e-14);
    }
  }
}

TEST_CASE("overlap examples for identical and fixed angles") {
  for (auto kind : {ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping}) {
    const double purity = overlap_oracle(reduced_system_state(kind, 1.3), reduced_system_state(kind, 1.3));
    CHECK(purity < 1.0);
    CHECK(swap_test(1.3, 1.3, kind, exact, 0) == doctest::Approx(purity).epsilon(1e-12));
    CHECK(aba_overlap(1.3, 1.3, kind, exact, 0) == doctest::Approx(purity).epsilon(1e-12));
    CHECK(inversion_test(1.3, 1.3, kind, exact, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inversion_test(0, 0, kind, exact, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto ad = ChannelKind::AmplitudeDamping;
  CHECK(std::abs(swap_test(0.3, 1.1, ad, exact, 0) - reference(OverlapMethod::SwapTest, ad, 0.3, 1.1)) <= 1e-10);
  CHECK(std::abs(inversion_test(0.5, 2.0, ad, exact, 0) - reference(OverlapMethod::InversionTest, ad, 0.5, 2.0)) <=
        1e-10);
}

TEST_CASE("basis-state preparations") {
  const Circuit zero(2);
  const Circuit one = Circuit(2).append(Gate::x(0));
  const Circuit plus = Circuit(2).append(Gate::h(0));
  CHECK(std::abs(swap_test(zero, one, exact, 0)) < 1e-14);
  CHECK(std::abs(aba_overlap(zero, one, exact, 0)) < 1e-14);
  CHECK(std::abs(bba_overlap(zero, one, exact, 0)) < 1e-14);
  CHECK(std::abs(inversion_test(zero, one, exact, 0)) < 1e-14);
  CHECK(bba_overlap(plus, plus, exact, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(aba_overlap(plus, plus, exact, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(swap_test(one, one, exact, 0) == doctest::Approx(1.0).epsilon(1e-14));
  // finite shots on orthogonal states: the ancilla is uniform
  const double noisy = swap_test(zero, one, Shots::finite(8192), 3);
  CHECK(std::abs(noisy) < 5 * 2 / std::sqrt(8192.0));
}

TEST_CASE("swap test shot noise") {
  const double ti = 0.7, tj = 2.2;
  const auto kind = ChannelKind::AmplitudeDamping;
  const double truth = swap_test(ti, tj, kind, exact, 0);
  double sum = 0, sq = 0;
  const int reps = 200;
  for (int s = 0; s < reps; ++s) {
    const double x = swap_test(ti, tj, kind, Shots::finite(8192), 1000 + static_cast<std::uint64_t>(s));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sq - reps * mean * mean) / (reps - 1));
  CHECK(sd <= 2 / std::sqrt(8192.0));
  CHECK(std::abs(mean - truth) <= 4 * sd / std::sqrt(static_cast<double>(reps)));
  CHECK(swap_test(ti, tj, kind, Shots::finite(8192), 5) == swap_test(ti, tj, kind, Shots::finite(8192), 5));
}

TEST_CASE("kernel functions") {
  CHECK(kernel_value(1.0, KernelFnSpec::exponential(3)) == 1.0);
  CHECK(kernel_value(1.0, KernelFnSpec::exponential(0.1)) == 1.0);
  CHECK(kernel_value(0.9, KernelFnSpec::polynomial(0.1, 3)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kernel_value(0.0, KernelFnSpec::exponential(3)) == doctest::Approx(0.049787068367863944).epsilon(1e-14));
  CHECK(kernel_value(0.25, KernelFnSpec::linear(0.5)) == 0.75);
  // clamping of shot-noise excursions
  CHECK(kernel_value(1.002, KernelFnSpec::exponential(3)) == 1.0);
  CHECK(kernel_value(-0.01, KernelFnSpec::exponential(3)) == kernel_value(0.0, KernelFnSpec::exponential(3)));
  double prev = -1;
  for (int k = 0; k <= 1000; ++k) {
    const double v = kernel_value(k / 1000.0, KernelFnSpec::exponential(3));
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(KernelFnSpec::polynomial(0.1, 0).validate(), ConfigError);
  CHECK_THROWS_AS(KernelFnSpec::exponential(-1).validate(), ConfigError);
  CHECK(describe(KernelFnSpec::polynomial(0.1, 3)).find(',') == std::string::npos);
}

TEST_CASE("method names") {
  for (auto m : {OverlapMethod::SwapTest, OverlapMethod::InversionTest, OverlapMethod::AncillaBased,
                 OverlapMethod::BellBasis, OverlapMethod::ExactOracle}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("hadamard"), ConfigError);
}

TEST_CASE("gram matrix examples") {
  const std::vector<double> one{0.4};
  const auto g1 = gram_matrix(one, ChannelKind::AmplitudeDamping, OverlapMethod::InversionTest,
                              KernelFnSpec::exponential(3), Shots::finite(100), 1);
  CHECK(g1.size() == 1);
  CHECK(g1.values(0, 0) == 1.0);

  const std::vector<double> same{0.8, 0.8};
  const auto g2 = gram_matrix(same, ChannelKind::PhaseDamping, OverlapMethod::InversionTest, KernelFnSpec::linear(0),
                              exact, 1);
  CHECK((g2.values.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS(gram_matrix(std::vector<double>{}, ChannelKind::PhaseDamping, OverlapMethod::SwapTest,
                           KernelFnSpec::linear(0), exact, 1));
}

TEST_CASE("gram matrices are symmetric and the oracle Gram is PSD") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(0, pi);
  std::vector<double> thetas(10);
  for (auto& t : thetas) t = u(gen);
  const auto oracle_gram = gram_matrix(thetas, ChannelKind::AmplitudeDamping, OverlapMethod::ExactOracle,
                                       KernelFnSpec::linear(0), exact, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle_gram.values);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);

  for (auto method : kCircuits) {
    const auto g = gram_matrix(thetas, ChannelKind::AmplitudeDamping, method, KernelFnSpec::exponential(3),
                               Shots::finite(512), 9);
    CHECK((g.values - g.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // schedule independence: entry (i, j) only depends on its own seed
    const std::vector<double> pair{thetas[2], thetas[5]};
    const double direct = kernel_value(estimate_overlap(method, thetas[2], thetas[5], ChannelKind::AmplitudeDamping,
                                                        Shots::finite(512), entry_seed(9, 2, 5)),
                                       KernelFnSpec::exponential(3));
    CHECK(g.values(2, 5) == direct);
  }
}

TEST_CASE("apply_kernel reuses the overlaps") {
  const std::vector<double> thetas{0.1, 0.9, 2.0};
  const auto base = gram_matrix(thetas, ChannelKind::AmplitudeDamping, OverlapMethod::SwapTest,
                                KernelFnSpec::linear(0), Shots::finite(256), 4);
  const auto expo = apply_kernel(base, KernelFnSpec::exponential(3));
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(expo.values(i, j) == kernel_value(base.overlaps(i, j), KernelFnSpec::exponential(3)));
}

TEST_CASE("gram CSV round-trip") {
  const std::vector<double> thetas{0.1, 0.9, 2.0, 2.5};
  const auto g = gram_matrix(thetas, ChannelKind::PhaseDamping, OverlapMethod::BellBasis,
                             KernelFnSpec::polynomial(0.1, 3), Shots::finite(300), 12);
  const auto path = std::filesystem::temp_directory_path() / "qkm_gram_roundtrip.csv";
  write_gram_csv(path.string(), g);
  const auto back = read_gram_csv(path.string());
  std::filesystem::remove(path);
  CHECK(back.values == g.values);
  CHECK(back.channel == g.channel);
  CHECK(back.method == g.method);
  CHECK(back.fn == g.fn);
  CHECK(back.shots == g.shots);
  CHECK(back.seed == g.seed);
}
