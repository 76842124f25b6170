#pragma once

// Event detectors for one bar collection B and one added bar A: crossing,
// bottleneck, no-escape, pivotality, viable locations, the multi-cluster of
// the root, good edges and potential-escape witnesses.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treecycles/bars.hpp"
#include "treecycles/meander.hpp"
#include "treecycles/tree.hpp"

namespace treecycles {

enum class Pivot { OnPivotal, OffPivotal, Neither };
enum class Boundary { FB, CB };

const char* to_string(Pivot pivot);
const char* to_string(Boundary boundary);

struct EventConfig {
  int n1 = 1;  // far-from-boundary cutoff: FB iff level(e_BN^-) <= n - 2 n1
};

struct Bottleneck {
  Edge edge;
  Bar bar;
};

struct EventRecord {
  Bar added;
  bool crossed = false;  // C
  std::optional<Bottleneck> bottleneck;
  std::optional<bool> no_escape;
  Pivot pivot = Pivot::Neither;
  std::optional<Boundary> fb_cb;
  std::optional<int> cb_prime_index;
  bool h_n_B = false;
  bool h_n_BA = false;
  /// Every edge on the root path to E(A)^+ supports at least one bar.
  bool path_supported = false;
};

/// Runs X^B and X^{B u A} from the root origin and classifies the pair.
/// Requires A not in B.
EventRecord detect(const BarCollection& bars, const Bar& added, const EventConfig& config = {});
EventRecord detect(MeanderEngine& engine, const LevelHit& hit, const Bar& added,
                   const EventConfig& config = {});

/// Whether X^B meets a joint of b before H_n (coverage of the two poles of E(b)).
bool meets_joint(const TreeShape& shape, const Trajectory& trajectory, const Bar& b);

/// Viable locations: for each edge e whose root path to e^+ is made of edges
/// with at least two bars, the heights visited by X^B on the poles of e^+
/// and e^- before H_n.
LocationSet viloc(const BarCollection& bars);
LocationSet viloc(const BarCollection& bars, const Trajectory& trajectory);

struct ClusterReport {
  std::vector<Edge> m_phi;
  std::vector<Edge> boundary;
  std::size_t size() const { return m_phi.size(); }
  std::size_t single_bar_boundary_count = 0;
  bool truncated = false;  // the cluster reached an edge into V_n
};

/// Candidate exploration from v over edges of T_[v] with at least two bars.
/// The d edges below v are the initial candidates; an examined candidate
/// either joins the cluster, adding the d edges below its child vertex, or
/// joins the exterior boundary.
ClusterReport multicluster(const BarCollection& bars, Vertex v = kRoot);

struct EscapeWitness {
  Edge edge;
  Vertex escape_vertex;
};

struct GoodWpe {
  std::vector<Edge> good;  // good edges on the root path to the current vertex
  std::vector<EscapeWitness> wpe;
};

/// Good edges and potential-escape witnesses on the path from the root to
/// `at`, given the coverage X[0, t) of the trajectory so far.
GoodWpe good_and_wpe(const BarCollection& bars, Vertex at, const Coverage& coverage);
/// Same, evaluated at the given time of a trajectory (left limits).
GoodWpe good_and_wpe(const BarCollection& bars, const Trajectory& trajectory, double at_time);
bool is_good(const BarCollection& bars, Edge e);

/// Edges that are good, lie on the current root path with e^+ != root, and
/// do not witness a potential escape, checked at the end of every segment
/// of the trajectory. Empty on a correct engine.
std::vector<std::string> good_wpe_violations(const BarCollection& bars, const Trajectory& trajectory);

struct RootStats {
  bool no_bar = false;
  bool nqg = false;
  int s_count = 0;
  bool new_ev = false;
};

RootStats root_stats(const BarCollection& bars);
RootStats root_stats(const BarCollection& bars, const ClusterReport& cluster, bool reached);

bool no_bar_on_added_edge(const BarCollection& bars, const Bar& added);

/// All per-sample inclusions for one (B, A). Each violated inclusion adds a
/// description; an empty result means every inclusion held.
std::vector<std::string> check_inclusions(const BarCollection& bars, const Bar& added,
                                          const EventConfig& config = {});

}  // namespace treecycles
