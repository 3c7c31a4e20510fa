#include "qrec/cli.hpp"

#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qrec/absorption.hpp"
#include "qrec/dihedral.hpp"
#include "qrec/io.hpp"

namespace qrec::cli {

namespace {

using io::Json;

constexpr double kCrossTol = 1e-6;

const char* kFooter = R"(Reports are JSON documents on stdout. Subspaces are written as frames
{"ambient_dim", "dim", "vectors"} with complex entries as [re, im].

dihedral CSV columns:
  --series       n,S_n        partial sums of the return potential from e
                 trailing "# key,value" lines: leak, fit_c (S_n ~ c sqrt n),
                 ratio_m, growth_ratio (S_4m / S_2m)
  --partition L  orbit,level,j,lower,upper,rank   dyadic cell ranks, levels 0..L
                 trailing lines: orbit_size, orthonormality_residual,
                 complete, orthogonal, refines, atomlessness_<level>
  --shift-check  position,orbit,orbit_position,label,word
                 trailing lines: interior_residual, full_residual

Exit codes: 0 success, 1 precondition failure, 2 parse failure.)";

struct Globals {
  std::uint64_t seed = 1;
  std::optional<double> rank_cut;
  std::optional<double> eq_tol;

  std::optional<Tolerances> override_tol() const {
    if (!rank_cut && !eq_tol) return std::nullopt;
    Tolerances t;
    if (rank_cut) t.rank_cut = *rank_cut;
    if (eq_tol) t.eq_tol = *eq_tol;
    t.validate();
    return t;
  }
};

io::ChannelSpec load_spec(const std::string& path, const Globals& g) {
  const std::optional<Tolerances> tol = g.override_tol();
  return io::load_channel_spec(path, tol ? &*tol : nullptr);
}

Json header(const char* command, const Globals& g) {
  Json doc;
  doc["command"] = command;
  doc["seed"] = g.seed;
  return doc;
}

Json absorption_json(const AbsorptionOperator& a) {
  Json j;
  j["method"] = to_string(a.method);
  j["enclosure"] = io::frame_json(a.enclosure);
  j["matrix"] = io::matrix_json(a.matrix);
  j["fixed_point_residual"] = a.fixed_point_residual;
  j["blocks_residual"] = a.blocks_residual;
  if (a.method == AbsorptionMethod::iterative) {
    j["converged"] = a.converged;
    j["terms"] = a.terms;
  } else {
    j["solve_residual"] = a.solve_residual;
    j["corner_radius"] = a.corner_radius;
  }
  return j;
}

Json recurrence_json(const RecurrenceDecomposition& rd) {
  Json j;
  j["positive"] = io::frame_json(rd.positive);
  j["null"] = io::frame_json(rd.null);
  j["transient"] = io::frame_json(rd.transient);
  j["positive_slack"] = rd.positive_slack;
  j["cesaro_terms"] = rd.terms;
  return j;
}

Json fixed_points_json(const FixedPointSpace& f, double eq_tol) {
  Json j;
  j["dim"] = f.dim();
  Json basis = Json::array();
  for (const CMatrix& b : f.basis) basis.push_back(io::matrix_json(b));
  j["basis"] = std::move(basis);
  const ClosureReport c = algebra_closure_check(f, eq_tol);
  j["closure"] = {{"closed", c.closed}, {"worst_i", c.worst_i}, {"worst_j", c.worst_j}, {"worst_distance", c.worst_distance}};
  return j;
}

Json reconstruction_json(const FixedPointReconstruction& r, double eq_tol) {
  return {{"span_dim", r.span.dim()},
          {"reference_dim", r.reference_dim},
          {"span_in_reference", r.span_in_reference},
          {"reference_in_span", r.reference_in_span},
          {"block_residual", r.block_residual},
          {"corner_residual", r.corner_residual},
          {"enclosures_used", r.enclosures_used},
          {"matches", r.matches(eq_tol)}};
}

void emit(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

int cmd_analyze(const std::string& path, const Globals& g, std::ostream& out) {
  const io::ChannelSpec spec = load_spec(path, g);
  const QuantumChannel& ch = spec.channel;
  const Tolerances& tol = ch.tol();
  const Superoperator map = superoperator_matrix(ch, Picture::heisenberg);

  Json doc = header("analyze", g);
  doc["label"] = spec.label;
  doc["fingerprint"] = ch.fingerprint();
  doc["dim"] = ch.dim();
  doc["tolerances"] = io::tolerances_json(tol);

  const RecurrenceDecomposition rd = recurrence_decomposition(map);
  doc["recurrence"] = recurrence_json(rd);
  const FixedPointSpace fps = fixed_point_space(map);
  doc["fixed_points"] = fixed_points_json(fps, tol.eq_tol);

  const Dome dome = minimal_enclosures(map, rd, g.seed);
  Json parts = Json::array();
  for (std::size_t i = 0; i < dome.parts.size(); ++i) {
    parts.push_back({{"frame", io::frame_json(dome.parts[i])}, {"slack", dome.slacks[i]}});
  }
  doc["dome"] = {{"parts", parts}, {"draws", dome.draws}};

  const AbsorbingCheck absorbing = is_absorbing_recurrent(map, rd);
  doc["absorbing_recurrent"] = {{"absorbing", absorbing.absorbing}, {"deviation", absorbing.deviation}};

  Json absorptions = Json::array();
  for (const Subspace& v : dome.parts) {
    const AbsorptionOperator it = absorption_iterative(map, v, rd);
    Json entry = absorption_json(it);
    if (absorbing.absorbing) {
      const AbsorptionOperator lin = absorption_linear(map, v, rd);
      entry["linear_agreement"] = op_norm(it.matrix - lin.matrix);
    }
    absorptions.push_back(std::move(entry));
  }
  doc["absorption"] = std::move(absorptions);

  if (absorbing.absorbing) {
    const AlgebraVerdict verdict = algebra_criterion(map, rd, dome, g.seed);
    doc["algebra"] = {{"is_algebra", verdict.is_algebra},
                      {"pairs_checked", verdict.pairs_checked},
                      {"worst_pair",
                       {{"v", io::frame_json(verdict.worst.v)},
                        {"w", io::frame_json(verdict.worst.w)},
                        {"norm", verdict.worst.norm}}}};
    doc["reconstruction"] = reconstruction_json(fixed_points_via_absorption(map, rd, dome, g.seed), tol.eq_tol);
  }
  emit(out, doc);
  return 0;
}

int cmd_fixed_points(const std::string& path, const Globals& g, std::ostream& out) {
  const io::ChannelSpec spec = load_spec(path, g);
  const Superoperator map = superoperator_matrix(spec.channel, Picture::heisenberg);
  const Tolerances& tol = spec.channel.tol();
  Json doc = header("fixed-points", g);
  doc["label"] = spec.label;
  doc["fingerprint"] = spec.channel.fingerprint();
  doc["tolerances"] = io::tolerances_json(tol);
  doc["fixed_points"] = fixed_points_json(fixed_point_space(map), tol.eq_tol);
  const RecurrenceDecomposition rd = recurrence_decomposition(map);
  if (is_absorbing_recurrent(map, rd).absorbing) {
    const Dome dome = minimal_enclosures(map, rd, g.seed);
    doc["reconstruction"] = reconstruction_json(fixed_points_via_absorption(map, rd, dome, g.seed), tol.eq_tol);
  }
  emit(out, doc);
  return 0;
}

int cmd_absorption(const std::string& path, const std::string& frame_path, const std::string& method,
                   const Globals& g, std::ostream& out) {
  const io::ChannelSpec spec = load_spec(path, g);
  const Tolerances& tol = spec.channel.tol();
  const Subspace v = io::load_frame(frame_path, tol);
  if (v.ambient_dim() != spec.channel.dim()) {
    throw PreconditionError("absorption", "enclosure lives in C^" + std::to_string(v.ambient_dim()) +
                                              " but the channel acts on C^" + std::to_string(spec.channel.dim()));
  }
  const Superoperator map = superoperator_matrix(spec.channel, Picture::heisenberg);
  const RecurrenceDecomposition rd = recurrence_decomposition(map);

  Json doc = header("absorption", g);
  doc["label"] = spec.label;
  doc["fingerprint"] = spec.channel.fingerprint();
  doc["tolerances"] = io::tolerances_json(tol);
  std::optional<AbsorptionOperator> it;
  std::optional<AbsorptionOperator> lin;
  if (method == "iter" || method == "both") it = absorption_iterative(map, v, rd);
  if (method == "linear" || method == "both") lin = absorption_linear(map, v, rd);
  Json results = Json::array();
  if (it) results.push_back(absorption_json(*it));
  if (lin) results.push_back(absorption_json(*lin));
  doc["results"] = std::move(results);
  if (it && lin) {
    const double diff = op_norm(it->matrix - lin->matrix);
    doc["agreement"] = {{"difference", diff}, {"cross_tol", kCrossTol}, {"agree", diff <= kCrossTol}};
  }
  emit(out, doc);
  return 0;
}

int cmd_classical(const std::string& path, const std::vector<long>& closed, bool cross_check, const Globals& g,
                  std::ostream& out) {
  const std::optional<Tolerances> tol = g.override_tol();
  const ClassicalChain chain = io::load_chain(path, tol.value_or(Tolerances{}));
  std::vector<Index> set(closed.begin(), closed.end());
  const RVector a = classical_absorption(chain, set);

  Json doc = header("classical", g);
  doc["states"] = chain.size();
  doc["closed"] = closed;
  doc["absorption"] = std::vector<double>(a.data(), a.data() + a.size());
  if (cross_check) {
    const QuantumChannel ch = embed_classical_chain(chain);
    const Superoperator map = superoperator_matrix(ch, Picture::heisenberg);
    const RecurrenceDecomposition rd = recurrence_decomposition(map);
    const AbsorptionOperator q = absorption_iterative(map, Subspace::coordinate(chain.size(), set), rd);
    const RVector diag = q.matrix.diagonal().real();
    const double dev = (diag - a).cwiseAbs().maxCoeff();
    doc["quantum_diagonal"] = std::vector<double>(diag.data(), diag.data() + diag.size());
    doc["max_deviation"] = dev;
    doc["agree"] = dev <= kCrossTol;
  }
  emit(out, doc);
  return 0;
}

int cmd_embed(const std::string& path, const Globals& g, std::ostream& out) {
  const std::optional<Tolerances> tol = g.override_tol();
  const ClassicalChain chain = io::load_chain(path, tol.value_or(Tolerances{}));
  emit(out, io::channel_spec_json(embed_classical_chain(chain), "embedded chain " + path));
  return 0;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

int cmd_dihedral(long n, const std::string& mode, int level, long n_max, long m, double tie_tol, std::ostream& out) {
  const DihedralWalk walk(n);
  if (mode == "series") {
    const Index horizon = n_max > 0 ? n_max : walk.radius() - 1;
    const PotentialSeries s = [&] {
      RVector x = RVector::Zero(walk.size());
      x(walk.index_of(0)) = 1.0;
      return potential_series(walk, x, walk.index_of(0), horizon, m);
    }();
    out << "n,S_n\n";
    for (std::size_t k = 0; k < s.sums.size(); ++k) out << (k + 1) << ',' << fmt(s.sums[k]) << '\n';
    out << "# leak," << fmt(s.leak) << '\n';
    out << "# fit_c," << fmt(s.fit_constant) << '\n';
    out << "# ratio_m," << s.ratio_m << '\n';
    out << "# growth_ratio," << fmt(s.growth_ratio) << '\n';
  } else if (mode == "partition") {
    const PartitionProjections p = partition_projections(walk, level, tie_tol);
    out << "orbit,level,j,lower,upper,rank\n";
    for (std::size_t o = 0; o < p.orbits.size(); ++o) {
      const OrbitPartition& orbit = p.orbits[o];
      for (int l = 0; l <= level; ++l) {
        const auto& ranks = orbit.ranks[static_cast<std::size_t>(l)];
        const double width = std::ldexp(1.0, -l);
        for (std::size_t j = 0; j < ranks.size(); ++j) {
          out << (o == 0 ? "even" : "odd") << ',' << l << ',' << j << ',' << fmt(-1.0 + width * static_cast<double>(j))
              << ',' << fmt(-1.0 + width * static_cast<double>(j + 1)) << ',' << ranks[j] << '\n';
        }
      }
    }
    for (std::size_t o = 0; o < p.orbits.size(); ++o) {
      const char* name = o == 0 ? "even" : "odd";
      out << "# orbit_size_" << name << ',' << p.orbits[o].size << '\n';
      out << "# orthonormality_residual_" << name << ',' << fmt(p.orbits[o].orthonormality_residual) << '\n';
    }
    out << "# complete," << (p.complete ? "true" : "false") << '\n';
    out << "# orthogonal," << (p.orthogonal ? "true" : "false") << '\n';
    out << "# refines," << (p.refines ? "true" : "false") << '\n';
    for (std::size_t l = 0; l < p.atomlessness.size(); ++l) {
      out << "# atomlessness_" << (l + 1) << ',' << fmt(p.atomlessness[l]) << '\n';
    }
  } else {
    const ShiftEquivalence s = shift_equivalence_check(walk);
    out << "position,orbit,orbit_position,label,word\n";
    for (std::size_t i = 0; i < s.order.size(); ++i) {
      const bool even = static_cast<Index>(i) < s.even_size;
      const Index pos = even ? static_cast<Index>(i) : static_cast<Index>(i) - s.even_size;
      const long label = walk.label_of(s.order[i]);
      out << i << ',' << (even ? "even" : "odd") << ',' << pos << ',' << label << ',' << word_of_label(label) << '\n';
    }
    out << "# interior_residual," << fmt(s.interior_residual) << '\n';
    out << "# full_residual," << fmt(s.full_residual) << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recurrence, enclosures and absorption for finite quantum channels", "qrec"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(kFooter);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for random draws (DOME splitting, random enclosures)")->capture_default_str();
  app.add_option("--rank-cut", g.rank_cut, "Override the relative rank threshold");
  app.add_option("--eq-tol", g.eq_tol, "Override the absolute equality tolerance");

  std::string spec_path;
  std::string frame_path;
  std::string method = "both";
  std::string chain_path;
  std::vector<long> closed;
  bool cross_check = false;
  long dihedral_n = 0;
  bool series = false;
  bool shift_check = false;
  std::optional<int> partition_level;
  long n_max = 0;
  long ratio_m = 0;
  double tie_tol = 1e-12;

  auto* analyze = app.add_subcommand("analyze", "Full pipeline: recurrence, fixed points, DOME, absorption, algebra verdict");
  analyze->add_option("spec", spec_path, "Channel spec file (JSON)")->required();

  auto* fixed = app.add_subcommand("fixed-points", "Fixed-point space and its reconstruction from absorption operators");
  fixed->add_option("spec", spec_path, "Channel spec file (JSON)")->required();

  auto* absorb = app.add_subcommand("absorption", "Absorption operator of one enclosure");
  absorb->add_option("spec", spec_path, "Channel spec file (JSON)")->required();
  absorb->add_option("--enclosure", frame_path, "Frame file {\"ambient_dim\", \"vectors\"}")->required();
  absorb->add_option("--method", method, "iter, linear or both")
      ->check(CLI::IsMember({"iter", "linear", "both"}))
      ->capture_default_str();

  auto* classical = app.add_subcommand("classical", "Classical absorption probabilities into a closed set");
  classical->add_option("chain", chain_path, "Chain file: n, then n rows of n probabilities")->required();
  classical->add_option("--closed", closed, "Closed set, comma separated state indices")->required()->delimiter(',');
  classical->add_flag("--cross-check", cross_check, "Also compute the quantum absorption of the embedded chain");

  auto* embed = app.add_subcommand("embed", "Write the diagonal embedding of a chain as a channel spec");
  embed->add_option("chain", chain_path, "Chain file")->required();

  auto* dihedral = app.add_subcommand("dihedral", "Truncated symmetric walk on the infinite dihedral group (CSV)");
  dihedral->add_option("--N", dihedral_n, "Truncation radius (word length)")->required();
  auto* o_series = dihedral->add_flag("--series", series, "Return-potential partial sums (default)");
  auto* o_part = dihedral->add_option("--partition", partition_level, "Spectral partition ranks up to this level");
  auto* o_shift = dihedral->add_flag("--shift-check", shift_check, "Orbit relabeling and shift residual");
  o_series->excludes(o_part)->excludes(o_shift);
  o_part->excludes(o_shift);
  dihedral->add_option("--n-max", n_max, "Series horizon, default N - 1");
  dihedral->add_option("--m", ratio_m, "Growth ratio uses S_4m / S_2m, default n_max / 4");
  dihedral->add_option("--tie-tol", tie_tol, "Cell boundary tie tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "cli: " << e.what() << '\n';
    return 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(spec_path, g, out);
    if (fixed->parsed()) return cmd_fixed_points(spec_path, g, out);
    if (absorb->parsed()) return cmd_absorption(spec_path, frame_path, method, g, out);
    if (classical->parsed()) return cmd_classical(chain_path, closed, cross_check, g, out);
    if (embed->parsed()) return cmd_embed(chain_path, g, out);
    if (dihedral->parsed()) {
      const std::string mode = partition_level ? "partition" : shift_check ? "shift" : "series";
      return cmd_dihedral(dihedral_n, mode, partition_level.value_or(0), n_max, ratio_m, tie_tol, out);
    }
  } catch (const ParseError& e) {
    err << e.module() << ": " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << e.module() << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace qrec::cli
