#include "sparsescale/core/trajectory_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sparsescale/core/errors.hpp"

namespace sparsescale {

void write_trajectory_csv(std::ostream& out, const ParamTrajectory& traj) {
  out << "segment_index,active_params,tokens\n";
  for (std::size_t i = 0; i < traj.segments.size(); ++i)
    out << i << ',' << traj.segments[i].active_params << ',' << traj.segments[i].tokens << '\n';
}

ParamTrajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("trajectory CSV is empty");
  if (line.rfind("segment_index,active_params,tokens", 0) != 0)
    throw SchemaError("trajectory CSV header must be 'segment_index,active_params,tokens'");
  std::vector<std::pair<Count, Count>> pairs;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    Count idx = 0, n = 0, d = 0;
    char c1 = 0, c2 = 0;
    if (!(row >> idx >> c1 >> n >> c2 >> d) || c1 != ',' || c2 != ',')
      throw SchemaError("malformed trajectory row: " + line);
    pairs.emplace_back(n, d);
  }
  if (pairs.empty()) throw SchemaError("trajectory CSV has no segments");
  return ParamTrajectory::from_pairs(pairs);
}

}  // namespace sparsescale
