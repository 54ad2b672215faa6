#include "attsync/run_io.hpp"

#include "attsync/errors.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace attsync {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

std::string trajectory_csv(const SimResult& r) {
  std::string out = "t,agent,x1,x2,x3,norm\n";
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    const StackedState& s = r.states[k];
    const std::string t = format_double(r.times[k]);
    for (std::size_t i = 0; i < s.agents(); ++i) {
      const AxisAngle xi = s.agent(i);
      out += t;
      out += ',';
      out += std::to_string(i + 1);
      for (int c = 0; c < 3; ++c) {
        out += ',';
        out += format_double(xi(c));
      }
      out += ',';
      out += format_double(xi.norm());
      out += '\n';
    }
  }
  return out;
}

std::string channels_csv(const SimResult& r) {
  static const char* const kColumns[] = {"V1", "V2", "V3", "disagreement", "max_norm"};
  std::string out = "t,V1,V2,V3,disagreement,max_norm\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out += format_double(r.times[k]);
    for (const char* c : kColumns) {
      out += ',';
      out += format_double(r.channel(c)[k]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace attsync
