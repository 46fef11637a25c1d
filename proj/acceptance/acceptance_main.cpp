// Acceptance gate: runs every criterion and prints one pass/fail line each.
// Exit 0 only when all requested criteria pass.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "lamtrans/lamtrans.hpp"

namespace {

int usage() {
  std::fprintf(stderr, "usage: acceptance [--seed N] [--criteria 1,2,...]\n");
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  lamtrans::AcceptanceOptions opt;
  std::vector<int> indices;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--seed" && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (a == "--criteria" && i + 1 < argc) {
      const std::string spec = argv[++i];
      size_t pos = 0;
      while (pos < spec.size()) {
        size_t next = spec.find(',', pos);
        if (next == std::string::npos) next = spec.size();
        try {
          const int v = std::stoi(spec.substr(pos, next - pos));
          if (v < 1 || v > 8) return usage();
          indices.push_back(v);
        } catch (const std::exception&) {
          return usage();
        }
        pos = next + 1;
      }
    } else {
      return usage();
    }
  }

  if (indices.empty()) indices = {1, 2, 3, 4, 5, 6, 7, 8};

  // One call per criterion so each line appears as soon as it finishes.
  bool all_pass = true;
  for (int idx : indices) {
    for (const auto& res : lamtrans::run_acceptance(opt, {idx})) {
      std::printf("[%s] criterion %d: %-32s (%.1f s)\n", res.pass ? "PASS" : "FAIL", res.index,
                  res.name.c_str(), res.seconds);
      for (const auto& d : res.details) std::printf("       %s\n", d.c_str());
      std::fflush(stdout);
      all_pass = all_pass && res.pass;
    }
  }
  std::printf("acceptance: %s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}
