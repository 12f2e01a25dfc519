// Full-level acceptance run: one PASS/FAIL line per criterion.

#include <cstdio>

#include "qhdyn/checks.hpp"

int main() {
  qhdyn::CheckOptions opt;
  opt.full = true;
  int failed = 0;
  auto line = [&](const qhdyn::CheckResult& r) {
    std::printf("%s criterion %2d %-18s value %.3e tol %.1e time %.1f/%.0f s | %s\n",
                r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.value, r.tolerance, r.seconds,
                r.budget, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  };
  std::vector<qhdyn::CheckResult> results = qhdyn::run_checks(opt, line);
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 && results.size() == qhdyn::check_registry().size() ? 0 : 1;
}
