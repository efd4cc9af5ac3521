#include "crtmap/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crtmap {

const char* kArtifactVersion = "0.1.0";

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& content) {
  std::uint64_t h = fnv1a64(content.data(), content.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string write_file_hashed(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
  return fnv1a64_hex(content);
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

RunManifest::RunManifest(std::string command, std::string config_echo,
                         std::uint64_t seed)
    : command_(std::move(command)),
      config_echo_(std::move(config_echo)),
      seed_(seed) {}

void RunManifest::add_file(const std::string& path, const std::string& hash) {
  files_.push_back({path, hash});
}

void RunManifest::set_results(const std::string& results_json) {
  results_json_ = results_json;
}

std::string RunManifest::to_json(double wall_time_s) const {
  std::ostringstream os;
  os << "{\"schema\":1,\"artifact_version\":\"" << kArtifactVersion
     << "\",\"command\":\"" << json_escape(command_) << "\",\"config\":"
     << config_echo_ << ",\"seed\":" << seed_ << ",\"wall_time_s\":"
     << wall_time_s << ",\"files\":[";
  for (std::size_t i = 0; i < files_.size(); ++i) {
    os << (i ? "," : "") << "{\"path\":\"" << json_escape(files_[i].path)
       << "\",\"fnv1a64\":\"" << files_[i].hash << "\"}";
  }
  os << "],\"results\":" << results_json_ << "}";
  return os.str();
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i)
    os << (i ? "," : "") << cells[i];
  os << "\n";
  return os.str();
}

std::string histogram_svg(const std::vector<double>& values, int bins,
                          const std::string& title) {
  const double w = 640, h = 400, ml = 50, mb = 40, mt = 30, mr = 15;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\">\n<rect width=\"100%\" height=\"100%\" "
     << "fill=\"white\"/>\n<text x=\"" << w / 2 << "\" y=\"18\" "
     << "text-anchor=\"middle\" font-size=\"13\">" << json_escape(title)
     << "</text>\n";
  if (values.empty() || bins < 1) {
    os << "</svg>\n";
    return os.str();
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi <= lo) hi = lo + 1.0;
  std::vector<int> count(bins, 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++count[b];
  }
  int cmax = *std::max_element(count.begin(), count.end());
  double bw = (w - ml - mr) / bins;
  for (int b = 0; b < bins; ++b) {
    double bh = (h - mt - mb) * count[b] / std::max(cmax, 1);
    os << "<rect x=\"" << ml + b * bw << "\" y=\"" << h - mb - bh << "\" width=\""
       << bw * 0.92 << "\" height=\"" << bh << "\" fill=\"#4878a8\"/>\n";
  }
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
     << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"" << h - mb + 16
     << "\" font-size=\"11\">" << lo << "</text>\n";
  os << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16
     << "\" text-anchor=\"end\" font-size=\"11\">" << hi << "</text>\n";
  os << "<text x=\"" << ml - 6 << "\" y=\"" << mt
     << "\" text-anchor=\"end\" font-size=\"11\">" << cmax << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace crtmap
