#include "licp_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "licp/coupling.hpp"
#include "licp/error.hpp"
#include "licp/local_geom.hpp"
#include "licp/tensor.hpp"
#include "licp/windmill.hpp"
#include "licp_cli/spec_file.hpp"

namespace licp::cli {
namespace {

constexpr double kLemmaTol = 1e-9;

struct Loaded {
  SpecFile spec;
  std::string digest;
};

Loaded load(const CommandOptions& o) {
  const std::string bytes = read_file(o.spec_path);
  std::string digest = sha256_hex(bytes);
  return Loaded{parse_spec(bytes), std::move(digest)};
}

SolverOptions solver_options(const CommandOptions& o) {
  SolverOptions s;
  s.seed = o.seed;
  s.tol = o.tol;
  s.grid = o.grid;
  s.cardinality = o.cardinality;
  s.epsilon = o.eps;
  return s;
}

Json columns_of(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(num_array(Vector(m.col(c))));
  return out;
}

Json ensemble_json(const CouplingEnsemble& e) {
  Json atoms = Json::array();
  for (std::size_t u = 0; u < e.size(); ++u) {
    atoms.push_back(Json{{"weight", num(e.weights()[u])}, {"L", num_array(e.perturbations()[u])}});
  }
  return Json{{"cardinality", e.size()}, {"epsilon", num(e.epsilon())}, {"atoms", std::move(atoms)}};
}

// Trace-normalized second moment of the ensemble in tangent coordinates.
Matrix tangent_moment(const CouplingEnsemble& e, const Matrix& basis) {
  Matrix m = Matrix::Zero(basis.cols(), basis.cols());
  for (std::size_t u = 0; u < e.size(); ++u) {
    const Vector d = basis.transpose() * e.perturbations()[u];
    m += e.weights()[u] * d * d.transpose();
  }
  return m / m.trace();
}

double information_unit(bool bits) { return bits ? 1.0 / std::numbers::ln2 : 1.0; }

Json decay_json(const DecayCheck& d) {
  return Json{{"ratios", num_array(d.ratios)}, {"threshold", num(kDecayRatio)}, {"passed", d.passed}};
}

void add_verify_tables(Report& r, Json& node, const std::string& prefix, const ProbDist& p,
                       const Vector& j, const std::vector<double>& eps) {
  const QuadraticApproxTable q = verify_quadratic_approx(p, j, eps);
  const SymmetryTable s = verify_divergence_symmetry(p, j, eps);
  Table qt{prefix + "_quadratic", {"eps", "exact_kl", "half_eps2_norm", "residual"}, {}};
  for (const ApproxRow& row : q.rows) {
    qt.rows.push_back({row.eps, row.exact_kl, row.half_eps2_norm, row.residual});
  }
  Table st{prefix + "_symmetry", {"eps", "gap"}, {}};
  for (const SymmetryRow& row : s.rows) st.rows.push_back({row.eps, row.gap});
  node["distribution"] = num_array(p.probs());
  node["direction"] = num_array(j);
  node["quadratic_decay"] = decay_json(q.decay);
  node["symmetry_decay"] = decay_json(s.decay);
  r.add_table(std::move(qt));
  r.add_table(std::move(st));
}

Json lemma_check(const Dtm& d, std::size_t n) {
  const std::size_t nx = d.input_dist().size();
  const std::size_t ny = d.output_dist().size();
  const std::size_t in_size = checked_power(nx, n, kDefaultSizeCap);
  const std::size_t out_size = checked_power(ny, n, kDefaultSizeCap);
  if (in_size > kDefaultDenseLimit || out_size > kDefaultDenseLimit) {
    return Json{{"letters", n}, {"skipped", "dense Kronecker power exceeds the size limit"}};
  }
  const SvdResult s = svd(d);
  const auto products = product_singular_values(s, n, in_size);
  const SvdResult dense = svd(dense_kron(d, n));
  double worst = 0.0;
  for (std::size_t i = 0; i < products.size(); ++i) {
    worst = std::max(worst, std::abs(products[i].value -
                                     dense.singular_values(static_cast<Eigen::Index>(i))));
  }
  return Json{{"letters", n},
              {"max_abs_difference", num(worst)},
              {"tolerance", num(kLemmaTol)},
              {"passed", worst <= kLemmaTol}};
}

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConvergenceFailure:
    case Errc::NumericalFailure:
    case Errc::FeasibilityFailure:
      return 3;
    default:
      return 2;
  }
}

Report cmd_dtm(const CommandOptions& o) {
  const Loaded in = load(o);
  const std::vector<Dtm> dtms = build_dtms(in.spec);
  Report r("dtm", in.digest);
  r.results()["input_dist"] = num_array(in.spec.input_dist.probs());
  Json channels = Json::array();
  for (std::size_t i = 0; i < dtms.size(); ++i) {
    const Dtm& d = dtms[i];
    const SvdResult s = svd(d);
    channels.push_back(Json{{"name", in.spec.channels[i].name},
                            {"B", num_matrix(d.matrix())},
                            {"output_dist", num_array(d.output_dist().probs())},
                            {"singular_values", num_array(s.singular_values)},
                            {"right_vectors", columns_of(s.right)},
                            {"left_vectors", columns_of(s.left)}});
  }
  r.results()["channels"] = std::move(channels);
  return r;
}

Report cmd_p2p(const CommandOptions& o) {
  const Loaded in = load(o);
  if (in.spec.channels.size() != 1) {
    fail(Errc::UsageError, "p2p needs exactly one channel; the spec has " +
                               std::to_string(in.spec.channels.size()) + " (use broadcast)");
  }
  const std::vector<Dtm> dtms = build_dtms(in.spec);
  const Dtm& d = dtms.front();
  Report r("p2p", in.digest);
  r.flags()["eps"] = num(o.eps);
  r.flags()["verify_exact"] = o.verify_exact;
  r.flags()["bits"] = o.bits;

  const LocalCapacity cap = local_capacity(d);
  Json& res = r.results();
  res["channel"] = in.spec.channels.front().name;
  res["sigma2"] = num(cap.sigma);
  res["efficiency"] = num(cap.efficiency());
  res["multiplicity"] = cap.multiplicity;
  res["locally_useless"] = cap.locally_useless;
  res["direction_L"] = num_array(cap.v2.vec());
  res["direction_J"] = num_array(unscale(cap.v2.vec(), d.input_dist()));
  if (cap.locally_useless) r.warn("locally useless channel: sigma2 is zero, no direction is visible");
  if (cap.multiplicity > 1) r.warn("sigma2 is repeated; the optimal direction is not unique");

  if (o.verify_exact) {
    const MaxMinSolution sol = solve_p2p(d, o.eps);
    const auto& ens = std::get<CouplingEnsemble>(sol.optimizer);
    const std::vector<double> w(ens.weights().probs().data(),
                                ens.weights().probs().data() + ens.weights().size());
    const std::vector<ProbDist> conds = ens.conditionals();
    std::vector<ProbDist> outs;
    for (const ProbDist& c : conds) outs.push_back(push_forward(d.channel(), c));
    const double ix = exact_mutual_information(w, conds);
    const double iy = exact_mutual_information(w, outs);
    const double unit = information_unit(o.bits);
    res["exact"] = Json{{"eps", num(o.eps)},
                        {"unit", o.bits ? "bits" : "nats"},
                        {"I_UX", num(ix * unit)},
                        {"I_UY", num(iy * unit)},
                        {"I_UX_quadratic", num(ens.quadratic_input_information() * unit)},
                        {"I_UY_quadratic",
                         num(ens.quadratic_input_information() * cap.efficiency() * unit)},
                        {"efficiency_exact", num(ix > 0.0 ? iy / ix : 0.0)},
                        {"efficiency_quadratic", num(cap.efficiency())},
                        {"ensemble", ensemble_json(ens)}};
  }
  return r;
}

Report cmd_broadcast(const CommandOptions& o) {
  const Loaded in = load(o);
  const std::size_t k = in.spec.channels.size();
  if (k < 2) fail(Errc::UsageError, "broadcast needs at least two channels (use p2p)");
  const std::vector<Dtm> dtms = build_dtms(in.spec);
  std::vector<QuadraticForm> forms;
  for (const Dtm& d : dtms) forms.push_back(tangent_form(d));
  const SolverOptions opts = solver_options(o);
  const std::size_t letters = o.letters == 0 ? 1 : o.letters;

  Report r("broadcast", in.digest);
  r.flags()["letters"] = letters;
  r.flags()["cardinality"] = o.cardinality;
  r.flags()["grid"] = o.grid;
  r.flags()["seed"] = o.seed;
  r.flags()["tol"] = num(o.tol);
  r.flags()["eps"] = num(o.eps);

  MaxMinSolution rank1;
  if (k == 2) {
    try {
      rank1 = solve_broadcast2(dtms[0], dtms[1], opts);
    } catch (const GapDetected& g) {
      rank1 = g.solution();
      r.warn("GapDetected: two-receiver duality gap " + num(rank1.gap).dump() +
             " exceeds tol " + num(o.tol).dump());
    }
  } else {
    rank1 = maxmin_rank1(forms, opts);
    if (rank1.gap > o.tol) {
      r.warn("informational: single-letter directions fall short of the dual bound by " +
             num(rank1.gap).dump() + " (expected for more than two receivers)");
    }
  }
  const MaxMinSolution ens = maxmin_ensemble(forms, opts);
  const auto& ensemble = std::get<CouplingEnsemble>(ens.optimizer);

  Json& res = r.results();
  res["channels"] = Json::array();
  for (const ChannelSpec& c : in.spec.channels) res["channels"].push_back(c.name);
  res["rank1"] = Json{{"value", num(rank1.value)},
                      {"direction", num_array(std::get<Vector>(rank1.optimizer))},
                      {"channel_values", num_array(rank1.channel_values)}};
  res["dual"] = Json{{"value", num(rank1.dual_value)}, {"weights", num_array(rank1.dual_weights)}};
  res["gap"] = num(rank1.gap);
  res["ensemble"] = ensemble_json(ensemble);
  res["ensemble"]["value"] = num(ens.value);
  res["ensemble"]["channel_values"] = num_array(ens.channel_values);

  if (letters > 1) {
    const Matrix m = tangent_moment(ensemble, forms.front().basis);
    const std::vector<Vector> dirs = frame_directions(m, letters);
    const KLetterResult kl = k_letter_construction(forms, dirs, o.eps);
    Json d = Json::array();
    for (const Vector& v : dirs) d.push_back(num_array(v));
    res["multi_letter"] = Json{{"letters", letters},
                               {"directions", std::move(d)},
                               {"per_channel_values", num_array(kl.per_channel_values)},
                               {"brute_force_values", num_array(kl.brute_force_values)}};
  }
  return r;
}

Report cmd_verify(const CommandOptions& o) {
  const Loaded in = load(o);
  const std::vector<Dtm> dtms = build_dtms(in.spec);
  Report r("verify", in.digest);
  r.flags()["eps_list"] = num_array(o.eps_list);

  Json channels = Json::array();
  bool all_passed = true;
  for (std::size_t i = 0; i < dtms.size(); ++i) {
    const Dtm& d = dtms[i];
    const std::string tag = "channel" + std::to_string(i);
    const LocalCapacity cap = local_capacity(d);
    const Vector jx = unscale(cap.v2.vec(), d.input_dist());
    const Vector jy = d.channel().matrix() * jx;
    Json node{{"name", in.spec.channels[i].name}};
    Json input = Json::object();
    Json output = Json::object();
    add_verify_tables(r, input, tag + "_input", d.input_dist(), jx, o.eps_list);
    add_verify_tables(r, output, tag + "_output", d.output_dist(), jy, o.eps_list);
    Json lemma = Json::array();
    for (const std::size_t n : {2u, 3u}) lemma.push_back(lemma_check(d, n));
    for (const Json* part : {&input, &output}) {
      all_passed = all_passed && (*part)["quadratic_decay"]["passed"].get<bool>() &&
                   (*part)["symmetry_decay"]["passed"].get<bool>();
    }
    for (const Json& l : lemma) {
      if (l.contains("passed")) all_passed = all_passed && l["passed"].get<bool>();
    }
    node["input_side"] = std::move(input);
    node["output_side"] = std::move(output);
    node["kronecker_lemma"] = std::move(lemma);
    channels.push_back(std::move(node));
  }
  r.results()["channels"] = std::move(channels);
  r.results()["all_passed"] = all_passed;
  return r;
}

Report cmd_windmill(const CommandOptions& o) {
  Report r("windmill", sha256_hex(""));
  const WindmillInstance w = make_windmill(o.k);
  const std::size_t letters = o.letters == 0 ? o.k : o.letters;
  r.flags()["k"] = o.k;
  r.flags()["letters"] = letters;
  r.flags()["theta"] = num(o.theta);
  r.flags()["seed"] = o.seed;
  r.flags()["plot_points"] = o.plot_points;
  if (w.degenerate) {
    r.warn("degenerate instance: with k = 2 both receivers share one line and there is no gap");
  }
  SolverOptions opts = solver_options(o);
  const MaxMinSolution single = single_letter_value(w, opts);
  const Vector& x = std::get<Vector>(single.optimizer);

  Json& res = r.results();
  res["angles"] = num_array(w.angles);
  res["single_letter"] = Json{{"value", num(single.value)},
                              {"direction", num_array(x)},
                              {"angle", num(std::atan2(x(1), x(0)))},
                              {"channel_values", num_array(single.channel_values)}};
  res["dual_value"] = num(single.dual_value);
  res["gap"] = num(single.gap);

  // Directions phi_{theta + pi j / n} average to I/2 for n >= 2.
  const auto schedule = [&](double theta) {
    std::vector<Vector> dirs;
    for (std::size_t j = 0; j < letters; ++j) {
      dirs.push_back(unit_direction(theta + std::numbers::pi * static_cast<double>(j) /
                                                static_cast<double>(letters)));
    }
    return dirs;
  };
  const auto schedule_values = [&](const std::vector<Vector>& dirs) {
    std::vector<double> vals;
    for (const QuadraticForm& f : w.forms) {
      double s = 0.0;
      for (const Vector& d : dirs) s += f.value(d);
      vals.push_back(s / static_cast<double>(dirs.size()));
    }
    return vals;
  };
  const KLetterResult kl = k_letter_construction(w.forms, schedule(o.theta), o.eps);
  res["multi_letter"] = Json{{"letters", letters},
                             {"theta", num(o.theta)},
                             {"per_channel_values", num_array(kl.per_channel_values)},
                             {"brute_force_values", num_array(kl.brute_force_values)}};

  if (!w.degenerate) {
    const CouplingEnsemble e = cardinality_solution(w, o.theta, o.eps);
    res["cardinality_ensemble"] = ensemble_json(e);
    res["cardinality_ensemble"]["channel_values"] = num_array(efficiency(e, w.forms));
  }

  Table angle{"min_efficiency_vs_angle", {"angle", "min_efficiency"}, {}};
  Table theta{"multi_letter_vs_theta", {"theta", "min_per_channel_value"}, {}};
  for (std::size_t p = 0; p < o.plot_points; ++p) {
    const double a = std::numbers::pi * static_cast<double>(p) / static_cast<double>(o.plot_points);
    double lo = 1.0;
    for (const QuadraticForm& f : w.forms) lo = std::min(lo, f.value(unit_direction(a)));
    angle.rows.push_back({a, lo});
    const std::vector<double> vals = schedule_values(schedule(a));
    theta.rows.push_back({a, *std::min_element(vals.begin(), vals.end())});
  }
  r.add_table(std::move(angle));
  r.add_table(std::move(theta));
  return r;
}

}  // namespace licp::cli
