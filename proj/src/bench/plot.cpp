#include "advrecon/bench/plot.hpp"

#include <sstream>

#include "advrecon/bench/csv.hpp"

namespace advrecon::bench {

std::string gnuplot_script(const std::string& title, const std::vector<CurvePoint>& points,
                           const std::string& output) {
  std::vector<std::string> keys;
  std::vector<std::vector<const CurvePoint*>> groups;
  for (const auto& p : points) {
    const std::string key = p.method + " " + std::string(noise_kind_name(p.kind));
    std::size_t g = 0;
    while (g < keys.size() && keys[g] != key) ++g;
    if (g == keys.size()) {
      keys.push_back(key);
      groups.emplace_back();
    }
    groups[g].push_back(&p);
  }

  std::ostringstream s;
  s << "# " << title << "\n";
  s << "set terminal pngcairo size 900,600\n";
  s << "set output '" << output << "'\n";
  s << "set title '" << title << "' noenhanced\n";
  s << "set xlabel 'relative noise level'\n";
  s << "set ylabel 'relative error'\n";
  s << "set key top left noenhanced\n";
  s << "set grid\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    s << "$d" << g << " << EOD\n";
    for (const CurvePoint* p : groups[g])
      s << format_double(p->rel_noise) << ' ' << format_double(p->rel_error_mean) << ' '
        << format_double(p->rel_error_std) << '\n';
    s << "EOD\n";
  }
  if (groups.empty()) return s.str();
  s << "plot ";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g) s << ", \\\n     ";
    s << "$d" << g << " using 1:2:3 with yerrorlines title '" << keys[g] << "'";
  }
  s << "\n";
  return s.str();
}

}  // namespace advrecon::bench
