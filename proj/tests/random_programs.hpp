#pragma once

#include <cstdio>
#include <random>
#include <string>

namespace promis::test {

/// Random hybrid program whose query `q` reduces, in every world, to a conjunction of
/// comparisons that are affine in one distinct Normal variable each.
inline std::string random_program(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  std::string text;
  const int facts = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < facts; ++i) text += num(0.05 + 0.9 * unit(rng)) + "::f" + std::to_string(i) + ".\n";
  const double w0 = 0.6 * unit(rng);
  const double w1 = (1.0 - w0) * unit(rng);
  text += num(w0) + "::w0; " + num(w1) + "::w1.\n";
  text += "h :- f0; w1";
  if (facts > 1) text += ", f1";
  text += ".\n";

  const int vars = 1 + static_cast<int>(rng() % 4);
  std::string body = "h";
  if (facts > 2) body += ", f2";
  static const char* ops[] = {"<", ">", "=<", ">="};
  for (int j = 0; j < vars; ++j) {
    const double mean = 200.0 * unit(rng) - 100.0;
    const double sd = 0.1 + 20.0 * unit(rng);
    const std::string v = "v" + std::to_string(j);
    text += v + " ~ normal(" + num(mean) + ", " + num(sd) + ").\n";
    const double a = (rng() % 2 ? 1.0 : -1.0) * (0.5 + 2.0 * unit(rng));
    const double b = 10.0 * unit(rng) - 5.0;
    const double c = a * mean + b + std::abs(a) * sd * (3.0 * unit(rng) - 1.5);
    body += ", " + num(a) + " * " + v + " + " + num(b) + " " + ops[rng() % 4] + " " + num(c);
  }
  text += "q :- " + body + ".\n";
  return text;
}

}  // namespace promis::test
