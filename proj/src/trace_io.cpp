#include "parc/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "parc/errors.hpp"

namespace parc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ContinuationTrace& trace) {
  out << kTraceCsvHeader << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    const TracePoint& p = trace.points[i];
    out << i << ',' << p.s << ',' << p.point.lambda << ',' << p.loss << ',' << p.grad_norm << ','
        << p.corrector_steps << ',' << p.penalty_residual << ',' << p.wall_ms << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ContinuationTrace& trace) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_trace_csv(out, trace);
}

ContinuationTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw FormatError("trace CSV header mismatch");
  }
  ContinuationTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) {
      throw FormatError("trace CSV row has " + std::to_string(cells.size()) + " columns");
    }
    TracePoint p;
    p.s = std::stod(cells[1]);
    p.point.lambda = std::stod(cells[2]);
    p.loss = std::stod(cells[3]);
    p.grad_norm = std::stod(cells[4]);
    p.corrector_steps = std::stoi(cells[5]);
    p.penalty_residual = std::stod(cells[6]);
    p.wall_ms = std::stod(cells[7]);
    trace.points.push_back(std::move(p));
  }
  return trace;
}

void write_sidecar(const std::filesystem::path& csv_path, const std::string& json_text) {
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ofstream out(sidecar);
  if (!out) {
    throw std::runtime_error("cannot write " + sidecar.string());
  }
  out << json_text << '\n';
}

}  // namespace parc
