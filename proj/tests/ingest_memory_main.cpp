// Streaming memory check: a 1M-line NDJSON capture must ingest with peak
// RSS bounded by O(largest line), not file size. Linux-only (VmHWM).

#include <cstdio>
#include <fstream>
#include <string>

#include "subtext/ingest.hpp"
#include "test_util.hpp"

namespace {

long read_vm_hwm_kb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) return std::atol(line.c_str() + 6);
  }
  return -1;
}

}  // namespace

int main() {
  testutil::TempDir dir("subtext_mem");
  auto path = dir.file("large.ndjson");

  constexpr std::size_t kLines = 1000000;
  {
    std::ofstream out(path, std::ios::binary);
    for (std::size_t i = 0; i < kLines; ++i) {
      out << "{\"id\":\"" << 7000000000000000000ULL + i
          << "\",\"desc\":\"synthetic post number " << i
          << " #storytime with a bit of padding text\"}\n";
    }
  }
  auto file_size = std::filesystem::file_size(path);

  long before_kb = read_vm_hwm_kb();
  std::size_t captures = 0, errors = 0;
  {
    subtext::NdjsonReader reader(path);
    while (auto item = reader.next()) {
      if (std::holds_alternative<subtext::RawCapture>(*item))
        ++captures;
      else
        ++errors;
    }
  }
  long after_kb = read_vm_hwm_kb();

  if (captures != kLines || errors != 0) {
    std::printf("FAIL: expected %zu captures, saw %zu (+%zu errors)\n", kLines,
                captures, errors);
    return 1;
  }
  if (before_kb < 0 || after_kb < 0) {
    std::printf("SKIP: VmHWM unavailable; streamed %zu lines fine\n", captures);
    return 0;
  }

  long grew_kb = after_kb - before_kb;
  long budget_kb = 64 * 1024;  // far below the ~100MB input
  std::printf("ingested %zu lines (%.1f MB file), peak RSS grew %ld KB\n",
              captures, static_cast<double>(file_size) / 1e6, grew_kb);
  if (grew_kb > budget_kb) {
    std::printf("FAIL: peak RSS growth %ld KB exceeds %ld KB budget\n",
                grew_kb, budget_kb);
    return 1;
  }
  std::printf("PASS: streaming memory bounded\n");
  return 0;
}
