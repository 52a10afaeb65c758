#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <random>

#include "glwire/errors.hpp"
#include "glwire/io.hpp"

using namespace glwire;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("glwire_test_io_" + name);
  fs::remove_all(p);
  return p;
}

TdglSystem small_wire(Scheme s) {
  auto d = build_wire_domain(2.0, 1.0, 17, 9);
  PhysicsParams p;
  p.kappa = 5.0;
  p.h_ex = 0.4;
  return TdglSystem(d, CurrentProfile::cosine(d.grid, 1.0, 0.5, 0.0), p, s);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("sha256 of standard vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("fmt round-trips doubles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double v = U(rng) * std::pow(10.0, double(k % 40 - 20));
    CHECK(same_bits(std::stod(fmt(v)), v));
  }
  CHECK(fmt(0.5) == "0.5");
  CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fmt(std::nan("")) == "nan");
}

TEST_CASE("field round trip and tamper detection") {
  const auto dir = scratch("field");
  const Grid g(5, 4, 0.25);
  RealField f(g.num_links());
  for (std::size_t l = 0; l < f.size(); ++l) f[l] = std::sin(double(l)) * 1e-3;
  write_field(dir, "A", g, f, FieldLocation::Links, "1/kappa");
  json h;
  const RealField back = read_field(dir, "A", &h);
  REQUIRE(back.size() == f.size());
  for (std::size_t l = 0; l < f.size(); ++l) CHECK(same_bits(back[l], f[l]));
  CHECK(h["location"] == "links");
  CHECK(h["count"] == g.num_links());

  CHECK_THROWS_AS(write_field(dir, "bad", g, f, FieldLocation::Nodes, ""), DomainError);

  std::string bytes = read_file(dir / "A.bin");
  bytes[3] ^= 1;
  write_file(dir / "A.bin", bytes);
  CHECK_THROWS_AS(read_field(dir, "A"), Error);
  fs::remove_all(dir);
}

TEST_CASE("mask RLE round trip") {
  const Grid g(7, 5, 0.5);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Mask m(g.num_nodes());
    const int bias = trial % 5;
    for (auto& v : m) v = std::uint8_t(rng() % 5 < std::uint64_t(bias));
    const json j = mask_to_rle(g, m);
    CHECK(mask_from_rle(j) == m);
    std::size_t total = 0;
    for (const auto& r : j["runs"]) total += r.get<std::size_t>();
    CHECK(total == g.num_nodes());
  }
  json bad = mask_to_rle(g, Mask(g.num_nodes(), 1));
  bad["runs"][0] = 3;
  CHECK_THROWS_AS(mask_from_rle(bad), Error);
}

TEST_CASE("checkpoint restart is bit exact") {
  for (Scheme sch : {Scheme::Explicit, Scheme::SemiImplicit}) {
    const auto dir = scratch("ckpt");
    auto sys = small_wire(sch);
    sys.set_projection_interval(3);
    GLState s = sys.initial_state(InitialData::Random, 11);
    for (int k = 0; k < 7; ++k) sys.step(s);
    write_checkpoint(dir, sys, s, json{{"note", "mid-run"}});
    GLState cont = s;
    for (int k = 0; k < 9; ++k) sys.step(cont);

    auto sys2 = small_wire(sch);
    sys2.set_projection_interval(3);
    json h;
    GLState r = read_checkpoint(dir, sys2, &h);
    CHECK(h["config"]["note"] == "mid-run");
    CHECK(r.step == 7);
    for (int k = 0; k < 9; ++k) sys2.step(r);
    REQUIRE(r.psi.size() == cont.psi.size());
    bool exact = r.t == cont.t && r.step == cont.step;
    for (std::size_t n = 0; n < r.psi.size(); ++n)
      exact = exact && same_bits(r.psi[n].real(), cont.psi[n].real()) && same_bits(r.psi[n].imag(), cont.psi[n].imag());
    for (std::size_t l = 0; l < r.A.size(); ++l) exact = exact && same_bits(r.A[l], cont.A[l]);
    for (std::size_t n = 0; n < r.phi.size(); ++n) exact = exact && same_bits(r.phi[n], cont.phi[n]);
    CHECK(exact);
    fs::remove_all(dir);
  }
}

TEST_CASE("checkpoint rejects a different system") {
  const auto dir = scratch("ckpt_mismatch");
  auto sys = small_wire(Scheme::Explicit);
  write_checkpoint(dir, sys, sys.initial_state(InitialData::Normal, 0));
  auto d = build_wire_domain(2.0, 1.0, 17, 9);
  PhysicsParams p;
  p.kappa = 6.0;
  p.h_ex = 0.4;
  TdglSystem other(d, CurrentProfile::cosine(d.grid, 1.0, 0.5, 0.0), p);
  CHECK_THROWS_AS(read_checkpoint(dir, other), Error);
  fs::remove_all(dir);
}

TEST_CASE("CSV rendering is deterministic and hashed") {
  CsvTable t({"x", "y"});
  for (int i = 0; i < 5; ++i) t.add_row({fmt(0.1 * i), fmt(std::exp(-0.1 * i))});
  const json cfg{{"b", 2}, {"a", 1}};
  const std::string a = t.render("demo", cfg), b = t.render("demo", cfg);
  CHECK(a == b);
  CHECK(csv_hash_ok(a));
  CHECK(a.find("# config {\"b\":2,\"a\":1}") != std::string::npos);  // insertion order kept
  std::string tampered = a;
  tampered[tampered.size() - 3] = tampered[tampered.size() - 3] == '1' ? '2' : '1';
  CHECK_FALSE(csv_hash_ok(tampered));
  CHECK_THROWS_AS(t.add_row({"1"}), Error);
}

TEST_CASE("CSV append keeps one valid hash") {
  const auto dir = scratch("append");
  const fs::path f = dir / "t.csv";
  CsvTable a({"k", "v"}), b({"k", "v"});
  a.add_row({"1", "2"});
  b.add_row({"3", "4"});
  a.append(f, "t", json::object());
  b.append(f, "t", json::object());
  const std::string text = read_file(f);
  CHECK(csv_hash_ok(text));
  CHECK(text.find("1,2\n3,4\n") != std::string::npos);
  CsvTable c({"k", "w"});
  c.add_row({"5", "6"});
  CHECK_THROWS_AS(c.append(f, "t", json::object()), Error);
  fs::remove_all(dir);
}

TEST_CASE("hashed JSON") {
  const auto dir = scratch("json");
  write_json_hashed(dir / "r.json", json{{"x", 1.5}, {"sha256", "stale"}});
  json j = json::parse(read_file(dir / "r.json"));
  CHECK(json_hash_ok(j));
  j["x"] = 2.5;
  CHECK_FALSE(json_hash_ok(j));
  fs::remove_all(dir);
}
