#include "flowcorr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowcorr/error.hpp"

namespace flowcorr {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_value(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'", line);
  }
  return v;
}

struct NumberedValue {
  double value;
  std::size_t line;
};

// Values with their 1-based line numbers; comments and blank lines skipped.
// When `header` is given, line 1 is returned there instead of parsed.
std::vector<NumberedValue> scan_values(const std::string& text, std::string* header = nullptr) {
  std::vector<NumberedValue> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  bool header_pending = header != nullptr;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (header_pending) {
      *header = std::string(s);
      header_pending = false;
      continue;
    }
    if (s.empty() || s.front() == '#') continue;
    out.push_back({parse_value(s, line), line});
  }
  return out;
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

FlowTrace parse_trace(const std::string& text) {
  const auto values = scan_values(text);
  std::vector<double> ts;
  ts.reserve(values.size());
  for (const auto& [v, line] : values) {
    if (v < 0.0) throw Error(ErrorCode::ParseError, "negative timestamp", line);
    if (!ts.empty() && v <= ts.back()) {
      throw Error(ErrorCode::MonotonicityError, "timestamp not after previous one", line);
    }
    ts.push_back(v);
  }
  return FlowTrace(std::move(ts));
}

FlowTrace read_trace(const std::filesystem::path& path) {
  FlowTrace t = parse_trace(read_file(path));
  return FlowTrace(std::vector<double>(t.timestamps().begin(), t.timestamps().end()),
                   path.filename().string());
}

std::string format_trace(const FlowTrace& trace) {
  std::string out;
  for (double t : trace.timestamps()) {
    out += format_fixed(t);
    out += '\n';
  }
  return out;
}

void write_trace(const std::filesystem::path& path, const FlowTrace& trace) {
  write_file_atomic(path, format_trace(trace));
}

DelayTrace parse_delays(const std::string& text) {
  std::string header;
  const auto values = scan_values(text, &header);
  constexpr std::string_view key = "period=";
  if (header.rfind(key, 0) != 0) {
    throw Error(ErrorCode::ParseError, "expected 'period=<seconds>' header", 1);
  }
  const double period = parse_value(trim(std::string_view(header).substr(key.size())), 1);
  if (period <= 0.0) throw Error(ErrorCode::ParseError, "period must be positive", 1);
  std::vector<double> samples;
  samples.reserve(values.size());
  for (const auto& nv : values) samples.push_back(nv.value);
  if (samples.size() < 2) {
    throw Error(ErrorCode::ParseError, "need at least two delay samples",
                values.empty() ? 1 : values.back().line);
  }
  return DelayTrace(std::move(samples), period);
}

DelayTrace read_delays(const std::filesystem::path& path) {
  return parse_delays(read_file(path));
}

std::string format_delays(const DelayTrace& delays) {
  std::string out = "period=" + format_fixed(delays.sample_period()) + "\n";
  for (double d : delays.samples()) {
    out += format_fixed(d);
    out += '\n';
  }
  return out;
}

std::vector<double> read_values(const std::filesystem::path& path) {
  const auto values = scan_values(read_file(path));
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& nv : values) out.push_back(nv.value);
  return out;
}

}  // namespace flowcorr
