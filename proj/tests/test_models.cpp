#include <doctest.h>

#include <cmath>

#include "driftcomp/models/drift_model.hpp"
#include "gradcheck.hpp"

using namespace driftcomp;
using driftcomp::testing::gradient_check;
using driftcomp::testing::random_batch;

namespace {

GruModel<double> zero_gru(Eigen::Index h) {
  return GruModel<double>{Matrix::Zero(h, 1), Matrix::Zero(h, h), Matrix::Zero(h, 1),
                          Matrix::Zero(h, h), Matrix::Zero(h, 1), Matrix::Zero(h, h),
                          Matrix::Zero(6, h), Vector::Zero(6)};
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

SupervisedSet affine_set(const std::array<double, kAxes>& slope,
                         const std::array<double, kAxes>& offset) {
  SupervisedSet set;
  for (int i = 0; i < 40; ++i) {
    const double t = -20.0 + 2.0 * i;
    set.inputs.emplace_back(std::vector<double>(3, t));
    Wrench w;
    for (std::size_t a = 0; a < kAxes; ++a) w[a] = offset[a] + slope[a] * t;
    set.targets.push_back(w);
  }
  set.axis_scale = max_abs_scale(set.targets);
  return set;
}

}  // namespace

TEST_CASE("gru_cell with zero weights halves the state") {
  const auto m = zero_gru(3);
  const Vector h = vec({0.3, -0.7, 2.0});
  const Vector out = gru_cell(m, vec({0.9}), h);
  CHECK(out == 0.5 * h);
}

TEST_CASE("gru_cell hand-evaluated scalar case") {
  auto m = zero_gru(1);
  m.w_xg(0, 0) = 1.0;
  const Vector h = gru_cell(m, vec({1.0}), vec({0.0}));
  // r = z = sigma(0) = 0.5, g = tanh(1), h = 0.5 tanh(1)
  CHECK(h(0) == doctest::Approx(0.380797).epsilon(1e-6));
  CHECK(std::abs(h(0) - 0.5 * std::tanh(1.0)) < 1e-15);
}

TEST_CASE("saturated update gate keeps the previous state") {
  auto m = zero_gru(2);
  m.w_xz.setConstant(60.0);
  m.w_xg.setConstant(1.0);
  const Vector h_prev = vec({0.25, -0.5});
  const Vector h = gru_cell(m, vec({1.0}), h_prev);
  CHECK((h - h_prev).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gru_cell state stays a convex combination") {
  const auto m = init_gru<double>(8, 3);
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Vector h(8);
    for (auto& v : h) v = rng.uniform(-3, 3);
    const Vector out = gru_cell(m, vec({rng.uniform(-2, 2)}), h);
    CHECK(out.cwiseAbs().maxCoeff() <= std::max(h.cwiseAbs().maxCoeff(), 1.0) + 1e-15);
  }
}

TEST_CASE("gru_forward fold") {
  SUBCASE("zero model") {
    const auto m = zero_gru(4);
    typename GruModel<double>::Workspace ws;
    const Block<double> x = Block<double>::Constant(10, 3, 0.4);
    CHECK(m.forward(x, ws).isZero(0));
  }
  SUBCASE("length-one window is one cell plus head") {
    const auto m = init_gru<double>(5, 9);
    typename GruModel<double>::Workspace ws;
    Block<double> x(1, 1);
    x(0, 0) = 0.3;
    const Vector h = gru_cell(m, vec({0.3}), Vector(Vector::Zero(5)));
    const Vector expected = m.head_w * h + m.head_b;
    CHECK((m.forward(x, ws).col(0) - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("order matters") {
    const auto m = init_gru<double>(8, 5);
    typename GruModel<double>::Workspace ws;
    Block<double> x(4, 1);
    x << -0.9, -0.2, 0.3, 0.8;
    const Block<double> fwd = m.forward(x, ws);
    const Block<double> rev = m.forward(x.colwise().reverse(), ws);
    CHECK((fwd - rev).cwiseAbs().maxCoeff() > 1e-6);
  }
  SUBCASE("empty window rejected") {
    const auto m = init_gru<double>(2, 1);
    typename GruModel<double>::Workspace ws;
    CHECK_THROWS_AS(m.forward(Block<double>(0, 1), ws), Error);
  }
}

TEST_CASE("mlp_forward examples") {
  SUBCASE("zero network") {
    auto m = init_mlp<double>(1, 36, 3, 1);
    MlpModel<double>::visit([](const std::string&, auto& p) { p.setZero(); }, m);
    CHECK(mlp_forward(m, vec({0.7})).isZero(0));
  }
  SUBCASE("single ReLU unit") {
    MlpModel<double> m;
    m.input_width = 1;
    m.layers.push_back({Matrix::Ones(1, 1), Vector::Zero(1)});
    m.layers.push_back({Matrix::Ones(6, 1), Vector::Zero(6)});
    m.check();
    CHECK(mlp_forward(m, vec({-3.0})).isZero(0));
    CHECK(mlp_forward(m, vec({2.0})) == Vector::Constant(6, 2.0));
  }
  SUBCASE("width mismatch") {
    const auto m = init_mlp<double>(10, 4, 2, 1);
    CHECK_THROWS_AS(mlp_forward(m, vec({1.0})), Error);
  }
}

TEST_CASE("tcn structure") {
  const auto m = init_tcn<double>(16, 3);
  CHECK(m.receptive_field() == 31);

  SUBCASE("zero weights") {
    auto z = m;
    TcnModel<double>::visit([](const std::string&, auto& p) { p.setZero(); }, z);
    typename TcnModel<double>::Workspace ws;
    CHECK(z.forward(Block<double>::Constant(10, 2, 0.5), ws).isZero(0));
  }
  SUBCASE("left padding repeats the oldest sample") {
    typename TcnModel<double>::Workspace ws;
    Block<double> short_win(10, 1), padded(31, 1);
    for (int i = 0; i < 10; ++i) short_win(i, 0) = 0.1 * i - 0.4;
    padded.topRows(21).setConstant(short_win(0, 0));
    padded.bottomRows(10) = short_win;
    const Block<double> a = m.forward(short_win, ws);
    const Block<double> b = m.forward(padded, ws);
    CHECK(a == b);
  }
  SUBCASE("samples beyond the receptive field cannot matter") {
    typename TcnModel<double>::Workspace ws;
    Block<double> x(40, 1);
    for (int i = 0; i < 40; ++i) x(i, 0) = std::sin(0.3 * i);
    const Block<double> base = m.forward(x, ws);
    Block<double> y = x;
    y.topRows(9).setConstant(5.0);
    CHECK(m.forward(y, ws) == base);
    y(9, 0) += 1.0;  // first sample inside the receptive field
    CHECK((m.forward(y, ws) - base).cwiseAbs().maxCoeff() > 0);
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (std::size_t batch : {1u, 8u}) {
    CAPTURE(batch);
    const auto [x, y] = random_batch(10, batch, 100 + batch);
    const auto mlp = init_mlp<double>(1, 36, 3, 1);
    const auto mlp_seq = init_mlp<double>(10, 36, 3, 2);
    const auto tcn = init_tcn<double>(16, 3);
    const auto gru = init_gru<double>(32, 4);
    for (const auto& r : {gradient_check(mlp, x, y), gradient_check(mlp_seq, x, y),
                          gradient_check(tcn, x, y), gradient_check(gru, x, y)}) {
      CAPTURE(r.worst_param);
      CHECK(r.worst_rel_error < 1e-4);
      CHECK(r.kinks * 100 <= r.checked);
    }
  }
}

TEST_CASE("backward is a mean over the batch") {
  const auto [x, y] = random_batch(10, 5, 21);
  Block<double> x2(x.rows(), 10), y2(y.rows(), 10);
  x2 << x, x;
  y2 << y, y;
  const auto gru = init_gru<double>(6, 1);
  const auto [l1, g1] = backward(gru, x, y);
  const auto [l2, g2] = backward(gru, x2, y2);
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-13));
  GruModel<double>::visit(
      [](const std::string&, const auto& a, const auto& b) {
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + a.cwiseAbs().maxCoeff()));
      },
      const_cast<GruModel<double>&>(g1), const_cast<GruModel<double>&>(g2));
}

TEST_CASE("perfect predictions give zero loss and gradient") {
  const auto tcn = init_tcn<double>(4, 8);
  const auto [x, unused] = random_batch(10, 3, 5);
  typename TcnModel<double>::Workspace ws;
  const Block<double> y = tcn.forward(x, ws);
  const auto [loss, grad] = backward(tcn, x, y);
  CHECK(loss == 0.0);
  TcnModel<double>::visit([](const std::string&, const auto& g) { CHECK(g.isZero(0)); },
                          const_cast<TcnModel<double>&>(grad));
}

TEST_CASE("init_params is deterministic and bounded") {
  for (auto family : {ModelFamily::Mlp, ModelFamily::MlpSeq, ModelFamily::Tcn, ModelFamily::Gru}) {
    CAPTURE(family_tag(family));
    const auto a = init_model(family, 17);
    const auto b = init_model(family, 17);
    const auto c = init_model(family, 18);
    std::ostringstream sa, sb, sc;
    write_model(a, sa);
    write_model(b, sb);
    write_model(c, sc);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());
  }
  const auto gru = init_gru<double>(32, 5);
  CHECK(gru.w_hr.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 32));
  CHECK(gru.w_xr.cwiseAbs().maxCoeff() <= 1.0);
  const auto mlp = init_mlp<double>(10, 36, 3, 5);
  CHECK(mlp.layers[0].w.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 10));
  CHECK(mlp.layers[1].w.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 36));
  const auto tcn = init_tcn<double>(16, 5);
  CHECK(tcn.blocks[1].conv1.taps[0].cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 32));
}

TEST_CASE("lsm_fit examples") {
  SUBCASE("exact line on one axis") {
    const auto set = affine_set({2, 0, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0});
    const auto m = lsm_fit<double>(set);
    CHECK(std::abs(m.c_t(0, 0) - 2.0) < 1e-9);
    CHECK(std::abs(m.o(0) - 1.0) < 1e-9);
    CHECK(m.c_t.bottomRows(5).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("constant targets") {
    const auto set = affine_set({0, 0, 0, 0, 0, 0}, {3, -1, 7, 0.5, 0.25, -2});
    const auto m = lsm_fit<double>(set);
    CHECK(m.c_t.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(m.o(2) - 7.0) < 1e-9);
  }
  SUBCASE("residual orthogonal to the regressors") {
    SupervisedSet set;
    Rng rng(3);
    for (int i = 0; i < 60; ++i) {
      const double t = rng.uniform(-20, 60);
      set.inputs.emplace_back(std::vector<double>{t});
      Wrench w;
      for (std::size_t a = 0; a < kAxes; ++a) w[a] = 0.01 * t * t * (a + 1) + rng.normal();
      set.targets.push_back(w);
    }
    const auto m = lsm_fit<double>(set);
    for (std::size_t a = 0; a < kAxes; ++a) {
      double r1 = 0, rt = 0, scale = 0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double t = set.inputs[i].last();
        const double resid = set.targets[i][a] - (m.o(a) + m.c_t(a, 0) * t);
        r1 += resid;
        rt += resid * t;
        scale += std::abs(set.targets[i][a] * t);
      }
      CHECK(std::abs(r1) <= 1e-8 * (1 + scale));
      CHECK(std::abs(rt) <= 1e-8 * (1 + scale));
    }
  }
  SUBCASE("identical temperatures are singular") {
    SupervisedSet set;
    for (int i = 0; i < 5; ++i) {
      set.inputs.emplace_back(std::vector<double>{25.0});
      set.targets.push_back(Wrench{1, 2, 3, 4, 5, 6});
    }
    try {
      lsm_fit<double>(set);
      FAIL("expected singularity");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Singularity);
    }
  }
}

TEST_CASE("lsm_predict examples") {
  DriftModel dm = init_model(ModelFamily::Lsm, 0, 0, 3);
  auto& lsm = std::get<LsmModel<double>>(dm.net);
  lsm.o << 1, 2, 3, 4, 5, 6;
  const std::vector<double> w1{0, 0, 13};
  CHECK(dm.predict(w1) == Wrench{1, 2, 3, 4, 5, 6});

  lsm.o.setZero();
  lsm.c_t(2, 0) = 1.0;
  const std::vector<double> w2{10, 20, 25};
  CHECK(dm.predict(w2).fz == 25.0);

  lsm.c_t << 0.5, -1, 2, 0.01, 0.02, -0.03;
  lsm.o << 1, 2, 3, 4, 5, 6;
  auto at = [&](double t) { return dm.predict(std::vector<double>{0, 0, t}); };
  const Wrench lhs = at(12.5) + at(-31.25) - at(0);
  const Wrench rhs = at(12.5 - 31.25);
  for (std::size_t a = 0; a < kAxes; ++a) CHECK(lhs[a] == doctest::Approx(rhs[a]).epsilon(1e-14));
}

TEST_CASE("model files reload to bit-identical predictions") {
  const auto [x, y] = random_batch(10, 16, 77);
  for (auto family : kAllFamilies) {
    CAPTURE(family_tag(family));
    DriftModel m = init_model(family, 9);
    m.axis_scale = {30, 20, 100, 1, 1.5, 0.7};
    if (family == ModelFamily::Lsm) {
      auto& lsm = std::get<LsmModel<double>>(m.net);
      lsm.c_t << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
      lsm.o << 1.0 / 3, 2, 3, 4, 5, 6;
    }
    std::stringstream buf;
    write_model(m, buf);
    const DriftModel back = read_model(buf);
    CHECK(back.predict_normalized(x) == m.predict_normalized(x));
    std::stringstream again;
    write_model(back, again);
    CHECK(again.str() == buf.str());
  }
}

TEST_CASE("model file errors") {
  std::istringstream junk("{\"format\": \"something-else\"}");
  CHECK_THROWS_AS(read_model(junk), Error);
  std::istringstream truncated("{\"format\": ");
  CHECK_THROWS_AS(read_model(truncated), Error);

  DriftModel m = init_model(ModelFamily::Gru, 1, 4);
  std::stringstream buf;
  write_model(m, buf);
  std::string text = buf.str();
  text.replace(text.find("\"hidden\": 4"), 11, "\"hidden\": 5");
  std::istringstream bad(text);
  CHECK_THROWS_AS(read_model(bad), Error);
}
