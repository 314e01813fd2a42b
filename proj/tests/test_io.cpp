#include <cstring>
#include <filesystem>

#include "support.hpp"

using namespace nlslab;
using nlslab::testing::ground_state;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::invalid_argument;
}

std::string what_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "nlslab_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FieldCodec, RoundTripIsBitwise) {
  std::mt19937_64 rng(4);
  Field f = nlslab::testing::random_smooth(Grid::periodic(16, 3.0), rng);
  f.time = 0.123456789012345678;
  f[5] = cplx(1e-310, -0.0);
  const auto bytes = io::encode_field(f);
  EXPECT_EQ(bytes.size(), io::kFieldHeaderBytes + 16 * f.size());
  const Field g = io::decode_field(bytes);
  EXPECT_EQ(g.grid.kind, f.grid.kind);
  EXPECT_EQ(g.grid.n, f.grid.n);
  EXPECT_EQ(g.grid.half_width, f.grid.half_width);
  EXPECT_EQ(g.time, f.time);
  EXPECT_EQ(std::memcmp(g.values.data(), f.values.data(), 16 * f.size()), 0);

  const Field r = nlslab::testing::gaussian(Grid::radial(100, 5.0), 1.0, 1.0);
  const auto path = scratch("r.nlsf").string();
  io::write_field(path, r);
  const Field r2 = io::read_field(path);
  EXPECT_EQ(r2.grid.kind, GridKind::radial1d);
  EXPECT_EQ(std::memcmp(r2.values.data(), r.values.data(), 16 * r.size()), 0);
}

TEST(FieldCodec, RejectsCorruptInput) {
  const auto good = io::encode_field(Field(Grid::periodic(4, 1.0)));

  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(code_of([&] { io::decode_field(bad); }), ErrorCode::bad_magic);

  bad = good;
  bad[4] = 2;
  EXPECT_EQ(code_of([&] { io::decode_field(bad); }), ErrorCode::version_mismatch);

  bad.assign(good.begin(), good.begin() + 100);
  EXPECT_EQ(code_of([&] { io::decode_field(bad); }), ErrorCode::truncated);
  EXPECT_NE(what_of([&] { io::decode_field(bad); }).find("offset 100"), std::string::npos);

  bad.assign(good.begin(), good.begin() + 10);
  EXPECT_EQ(code_of([&] { io::decode_field(bad); }), ErrorCode::truncated);

  bad = good;
  bad.push_back(0);
  EXPECT_EQ(code_of([&] { io::decode_field(bad); }), ErrorCode::parse_error);

  EXPECT_EQ(code_of([] { io::read_field("/nonexistent/nowhere.nlsf"); }), ErrorCode::io_error);
}

TEST(ProfileCodec, RoundTrip) {
  const auto& q = ground_state();
  const GroundState r = io::decode_profile(io::encode_profile(q));
  EXPECT_EQ(r.n, q.n);
  EXPECT_EQ(r.r_max, q.r_max);
  EXPECT_EQ(r.mass_sq, q.mass_sq);
  EXPECT_EQ(r.grad_sq, q.grad_sq);
  EXPECT_EQ(r.l4_4, q.l4_4);
  EXPECT_EQ(r.shoot_value, q.shoot_value);
  EXPECT_EQ(r.profile, q.profile);
  EXPECT_EQ(r.value(25.0), q.value(25.0));
  EXPECT_EQ(r.c_gn, q.c_gn);
}

TEST(ProfileCodec, RejectsBrokenText) {
  const auto& q = ground_state();
  const std::string text = io::encode_profile(q);
  EXPECT_EQ(code_of([&] { io::decode_profile(text.substr(text.find('\n') + 1)); }), ErrorCode::bad_magic);
  std::string v2 = text;
  v2.replace(v2.find("v1"), 2, "v2");
  EXPECT_EQ(code_of([&] { io::decode_profile(v2); }), ErrorCode::version_mismatch);
  EXPECT_EQ(code_of([&] { io::decode_profile(text.substr(0, text.rfind('\n', text.size() / 2) + 1)); }), ErrorCode::truncated);
  std::string junk = text + "abc def\n";
  EXPECT_EQ(code_of([&] { io::decode_profile(junk); }), ErrorCode::parse_error);
}

TEST(CsvCodec, RoundTripIsExact) {
  const auto& q = ground_state();
  EvolveConfig cfg;
  cfg.dt0 = 1e-2;
  cfg.t_end = 0.05;
  cfg.diag_every = 1;
  const auto res = evolve(nlslab::testing::gaussian(Grid::periodic(32, 8.0), 1.0, 1.0), cfg, q);
  const std::string text = io::encode_csv(res.diagnostics);
  const auto rows = io::decode_csv(text);
  ASSERT_EQ(rows.size(), res.diagnostics.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].t, res.diagnostics[i].t);
    EXPECT_EQ(rows[i].energy, res.diagnostics[i].energy);
    EXPECT_EQ(rows[i].variance, res.diagnostics[i].variance);
    EXPECT_EQ(rows[i].rprime, res.diagnostics[i].rprime);
  }
  EXPECT_EQ(io::encode_csv(rows), text);
  EXPECT_EQ(text.substr(0, text.find('\n')), io::kCsvHeader);
}

TEST(CsvCodec, RejectsBadRows) {
  EXPECT_EQ(code_of([] { io::decode_csv("t,mass\n"); }), ErrorCode::parse_error);
  const std::string head = std::string(io::kCsvHeader) + "\n";
  EXPECT_NE(what_of([&] { io::decode_csv(head + "1,2,3,4,5,6,7,8,9,10,11\n1,2,3\n"); }).find("line 3"),
            std::string::npos);
  EXPECT_EQ(io::decode_csv(head + "1,2,3,4,5,6,7,8,9,10,inf\n").at(0).A_R_bound,
            std::numeric_limits<double>::infinity());
}

TEST(Config, ParsesAllKeys) {
  const auto cfg = parse_config(R"(# sample
kind = radial1d
n = 4096
r_max = 30
dt0 = 0.002
t_end = 1.5
blowup_factor = 10
snapshot_every = 0
diag_every = 3
dealias = false
init = soliton a=1.2 lambda=1.1 theta=0.5
modes = finite_variance, radial
gamma = 0.1
seed = 42
)");
  EXPECT_EQ(cfg.kind, GridKind::radial1d);
  EXPECT_EQ(cfg.n, 4096u);
  EXPECT_EQ(cfg.L, 30.0);
  EXPECT_EQ(cfg.evolve.dt0, 0.002);
  EXPECT_EQ(cfg.evolve.t_end, 1.5);
  EXPECT_EQ(cfg.evolve.blowup_factor, 10.0);
  EXPECT_EQ(cfg.evolve.diag_every, 3u);
  EXPECT_FALSE(cfg.evolve.dealias);
  EXPECT_EQ(cfg.init.kind, InitSpec::Kind::soliton);
  EXPECT_EQ(cfg.init.a, 1.2);
  EXPECT_EQ(cfg.init.lambda, 1.1);
  EXPECT_EQ(cfg.init.theta, 0.5);
  ASSERT_EQ(cfg.modes.size(), 2u);
  EXPECT_EQ(cfg.modes[1], BoundMode::radial);
  EXPECT_EQ(cfg.gamma, 0.1);
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  const std::pair<const char*, const char*> cases[] = {
      {"n = 64\nbogus = 1\n", "config line 2"},
      {"n = 64\nn = 32\n", "config line 2"},
      {"\n\ndt0 = fast\n", "config line 3"},
      {"init = soliton a=1 q=2\n", "config line 1"},
      {"kind = cubic\n", "config line 1"},
      {"dealias = maybe\n", "config line 1"},
      {"no equals sign\n", "config line 1"},
  };
  for (const auto& [text, where] : cases) {
    EXPECT_EQ(code_of([&] { parse_config(text); }), ErrorCode::parse_error) << text;
    EXPECT_NE(what_of([&] { parse_config(text); }).find(where), std::string::npos) << text;
  }
  EXPECT_EQ(code_of([] { read_config("/nonexistent/run.cfg"); }), ErrorCode::io_error);
}

TEST(Config, InitialDataFromConfig) {
  const auto& q = ground_state();
  auto cfg = parse_config("n = 32\nL = 8\ninit = gaussian A=0.8 w=1.2 x0=0.5,0,0\n");
  const Field f = make_initial(cfg, q);
  const Field g = nlslab::testing::gaussian(Grid::periodic(32, 8.0), 0.8, 1.2, {0.5, 0.0, 0.0});
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_NEAR(std::abs(f[i] - g[i]), 0.0, 1e-15);

  const auto path = scratch("init.nlsf").string();
  io::write_field(path, g);
  cfg = parse_config("n = 32\nL = 8\ninit = file " + path + "\n");
  EXPECT_EQ(make_initial(cfg, q).values, g.values);
  cfg = parse_config("n = 16\nL = 8\ninit = file " + path + "\n");
  EXPECT_THROW(make_initial(cfg, q), Error);
}

TEST(Config, SeededNoiseIsDeterministic) {
  const auto& q = ground_state();
  const std::string base = "n = 32\nL = 8\ninit = gaussian A=1 w=1\nnoise = 0.05\ndt0 = 0.01\nt_end = 0.05\n";
  const auto a = parse_config(base + "seed = 7\n");
  const auto b = parse_config(base + "seed = 7\n");
  const auto c = parse_config(base + "seed = 8\n");
  const Field fa = make_initial(a, q), fb = make_initial(b, q), fc = make_initial(c, q);
  EXPECT_EQ(fa.values, fb.values);
  EXPECT_NE(fa.values, fc.values);
  EXPECT_EQ(io::encode_csv(evolve(fa, a.evolve, q).diagnostics), io::encode_csv(evolve(fb, b.evolve, q).diagnostics));
}
