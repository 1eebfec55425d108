#include <cfreq/rng.hpp>

#include <cmath>
#include <cstdint>
#include <doctest.h>

using cfreq::SplitMix64;

TEST_CASE("splitmix64 matches the published reference sequence for seed 0") {
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFull);
  CHECK(g.next() == 0x6E789E6AA1B965F4ull);
  CHECK(g.next() == 0x06C45D188009454Full);
}

TEST_CASE("identical seeds give identical streams") {
  SplitMix64 a(987654321), b(987654321);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("derive_stream is deterministic and separates coordinates") {
  CHECK(cfreq::derive_stream(42, 1, 2, 3) == 0x45BFBF5364D94A54ull);
  CHECK(cfreq::derive_stream(42, 1, 2, 3) != cfreq::derive_stream(42, 1, 3, 2));
  CHECK(cfreq::derive_stream(42, 1, 2, 3) != cfreq::derive_stream(43, 1, 2, 3));
  CHECK(cfreq::derive_stream(7, 0, 0, 0) != cfreq::derive_stream(7, 1, 0, 0));
}

TEST_CASE("uniform variates live in the documented ranges") {
  SplitMix64 g(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = g.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("uniform mean and variance are sane") {
  SplitMix64 g(11);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    s += u;
    s2 += u * u;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);       // ~5 sigma of 1/sqrt(12n)
  CHECK(std::abs(var - 1.0 / 12.0) < 0.005);
}

TEST_CASE("normal variates have unit variance and zero mean") {
  SplitMix64 g(17);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = g.normal();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("complex normal has E|z|^2 = 1 and balanced parts") {
  SplitMix64 g(23);
  const int n = 100000;
  double p = 0, re2 = 0, im2 = 0;
  for (int i = 0; i < n; ++i) {
    const auto z = g.normal_complex();
    p += std::norm(z);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
  }
  CHECK(std::abs(p / n - 1.0) < 0.02);
  CHECK(std::abs(re2 / n - 0.5) < 0.02);
  CHECK(std::abs(im2 / n - 0.5) < 0.02);
}
