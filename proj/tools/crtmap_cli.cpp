#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crtmap/embed.hpp"
#include "crtmap/map.hpp"
#include "crtmap/orientation.hpp"
#include "crtmap/path.hpp"
#include "crtmap/records.hpp"
#include "crtmap/report.hpp"
#include "crtmap/stats.hpp"
#include "crtmap/submap.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStructural = 1;
constexpr int kExitStatistical = 2;

struct CommonOpts {
  double gamma = 1.0;
  double eps = 1.0;
  double horizon = 10.0;
  int subgrid = 4;
  std::uint64_t seed = 0;
  int replicas = 1;
  int jobs = 1;
  std::string out;
  bool bridge_exact = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--gamma", o.gamma, "LQG parameter in (0,2)");
  cmd->add_option("--eps", o.eps, "Poisson cell size (intensity 1/eps)");
  cmd->add_option("--horizon", o.horizon, "simulate on [-horizon, horizon]");
  cmd->add_option("--subgrid", o.subgrid, "expected refinement points per cell");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--replicas", o.replicas, "number of replicas");
  cmd->add_option("--jobs", o.jobs, "replica-level parallelism");
  cmd->add_option("--out", o.out, "write the JSON report here");
  cmd->add_flag("--bridge-exact", o.bridge_exact,
                "use exact bridge minima instead of sub-grid infima");
}

crtmap::SimConfig to_config(const CommonOpts& o) {
  crtmap::SimConfig cfg;
  cfg.gamma = o.gamma;
  cfg.epsilon = o.eps;
  cfg.horizon = o.horizon;
  cfg.subgrid = o.subgrid;
  cfg.seed = o.seed;
  cfg.replicas = o.replicas;
  cfg.inf_mode = o.bridge_exact ? crtmap::InfimumMode::kBridgeExact
                                : crtmap::InfimumMode::kSubgrid;
  return cfg;
}

json config_json(const crtmap::SimConfig& cfg) {
  return json{{"gamma", cfg.gamma},
              {"epsilon", cfg.epsilon},
              {"horizon", cfg.horizon},
              {"subgrid", cfg.subgrid},
              {"seed", cfg.seed},
              {"replicas", cfg.replicas},
              {"inf_mode", cfg.inf_mode == crtmap::InfimumMode::kSubgrid
                               ? "subgrid"
                               : "bridge_exact"}};
}

int emit_report(const CommonOpts& o, const std::string& command,
                const crtmap::SimConfig& cfg, json results,
                std::vector<std::pair<std::string, std::string>> files,
                double wall_s, int exit_code) {
  crtmap::RunManifest manifest(command, config_json(cfg).dump(), cfg.seed);
  for (auto& [p, h] : files) manifest.add_file(p, h);
  results["exit_code"] = exit_code;
  manifest.set_results(results.dump());
  std::string text = manifest.to_json(wall_s);
  if (!o.out.empty()) {
    crtmap::write_file_hashed(o.out, text);
  }
  std::cout << text << "\n";
  return exit_code;
}

// Cells cache under CRTMAP_CACHE_DIR keyed by the config and replica.
crtmap::CellSequence cells_for(const crtmap::SimConfig& cfg, int replica) {
  const char* dir = std::getenv("CRTMAP_CACHE_DIR");
  if (!dir || !*dir) return crtmap::sample_path(cfg, replica);
  std::ostringstream key;
  key << cfg.gamma << "|" << cfg.epsilon << "|" << cfg.horizon << "|"
      << cfg.subgrid << "|" << cfg.seed << "|" << replica << "|"
      << (cfg.inf_mode == crtmap::InfimumMode::kSubgrid ? "s" : "b");
  fs::path p = fs::path(dir) / ("cells_" + crtmap::fnv1a64_hex(key.str()) + ".crtc");
  if (fs::exists(p)) return crtmap::load_cells(p.string());
  crtmap::CellSequence cells = crtmap::sample_path(cfg, replica);
  fs::create_directories(p.parent_path());
  crtmap::save_cells(cells, p.string());
  return cells;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson mated-CRT map laboratory"};
  app.set_config("--config", "", "key-per-flag plain-text config file");
  app.require_subcommand(1);

  // ---- simulate-map ----
  auto* sim = app.add_subcommand("simulate-map", "sample a path and build the map");
  CommonOpts sim_o;
  add_common(sim, sim_o);
  std::string dump_map, dump_cells;
  int sim_replica = 0;
  sim->add_option("--replica", sim_replica, "replica id");
  sim->add_option("--dump-map", dump_map, "write the map (json or .crtm)");
  sim->add_option("--dump-cells", dump_cells, "write the cell cache (CRTC)");

  // ---- check-identities ----
  auto* chk = app.add_subcommand("check-identities",
                                 "exact curvature identity suite");
  CommonOpts chk_o;
  add_common(chk, chk_o);
  int chk_seeds = 10;
  int chk_cells = 1000;
  int chk_funcs = 10;
  chk->add_option("--seeds", chk_seeds, "number of seeded maps");
  chk->add_option("--cells", chk_cells, "cells per map");
  chk->add_option("--functions", chk_funcs, "random test functions per map");

  // ---- cell-curvature ----
  auto* cc = app.add_subcommand("cell-curvature", "induced submap statistics");
  CommonOpts cc_o;
  add_common(cc, cc_o);
  std::vector<long long> cc_range{0, 0};
  cc->add_option("--range", cc_range, "global cell range a b")->expected(2);

  // ---- boundary-stats ----
  auto* bs = app.add_subcommand("boundary-stats",
                                "record bands, alpha, iid diagnostics");
  CommonOpts bs_o;
  add_common(bs, bs_o);
  int bs_bands = 1000;
  std::string bs_csv;
  bs->add_option("--bands", bs_bands, "completed bands per replica");
  bs->add_option("--csv", bs_csv, "per-replica CSV table");

  // ---- scaling-experiment ----
  auto* sc = app.add_subcommand("scaling-experiment",
                                "total curvature of the unit cell range");
  CommonOpts sc_o;
  add_common(sc, sc_o);
  std::vector<double> sc_eps{1e-2, 2.5e-3, 6.25e-4};
  double sc_alpha = 0.0;
  std::string sc_csv, sc_svg;
  sc->add_option("--eps-list", sc_eps, "epsilon values, factor-4 ladder");
  sc->add_option("--alpha", sc_alpha, "alpha for the mixture oracle (0 = estimate)");
  sc->add_option("--csv", sc_csv, "per-replica CSV table");
  sc->add_option("--svg", sc_svg, "histogram of the smallest-eps statistics");

  // ---- embed ----
  auto* em = app.add_subcommand("embed", "harmonic embedding of a window");
  CommonOpts em_o;
  add_common(em, em_o);
  std::vector<long long> em_range{0, 0};
  std::string em_svg, em_field = "bump";
  double em_tol = 1e-10;
  em->add_option("--range", em_range, "global cell range a b")->expected(2);
  em->add_option("--svg", em_svg, "render the triangulation");
  em->add_option("--field", em_field, "test field: gaussian|bump");
  em->add_option("--tol", em_tol, "harmonic solver tolerance");

  // ---- calibrate ----
  auto* cal = app.add_subcommand("calibrate", "estimate alpha and null rates");
  CommonOpts cal_o;
  add_common(cal, cal_o);
  int cal_bands = 2000;

  cal->add_option("--bands", cal_bands, "bands per replica");

  CLI11_PARSE(app, argc, argv);
  auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  try {
    if (sim->parsed()) {
      crtmap::SimConfig cfg = to_config(sim_o);
      cfg.validate();
      crtmap::CellSequence cells = cells_for(cfg, sim_replica);
      crtmap::MatedMap map = crtmap::build_map(cells);
      std::vector<std::pair<std::string, std::string>> files;
      if (!dump_cells.empty()) {
        crtmap::save_cells(cells, dump_cells);
        std::ifstream f(dump_cells, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        files.push_back({dump_cells, crtmap::fnv1a64_hex(ss.str())});
      }
      if (!dump_map.empty()) {
        if (dump_map.size() > 5 &&
            dump_map.substr(dump_map.size() - 5) == ".crtm") {
          crtmap::save_map(map, dump_map);
          std::ifstream f(dump_map, std::ios::binary);
          std::stringstream ss;
          ss << f.rdbuf();
          files.push_back({dump_map, crtmap::fnv1a64_hex(ss.str())});
        } else {
          std::string js = crtmap::map_to_json(map);
          files.push_back({dump_map, crtmap::write_file_hashed(dump_map, js)});
        }
      }
      json res;
      res["n_cells"] = cells.n_cells();
      res["n_edges"] = map.edges.size();
      res["n_faces"] = map.faces.size();
      std::size_t tainted = 0;
      for (auto t : map.tainted) tainted += t;
      res["tainted_vertices"] = tainted;
      if (cells.n_cells() >= 1000) {
        crtmap::GapCheckReport gap = crtmap::poisson_gap_check(cells);
        res["gap_check"] = json{{"ks", gap.ks_statistic},
                                {"p", gap.p_value},
                                {"flagged", gap.flagged}};
      }
      return emit_report(sim_o, "simulate-map", cfg, res, files, wall(), kExitOk);
    }

    if (chk->parsed()) {
      crtmap::SimConfig cfg = to_config(chk_o);
      cfg.horizon = std::max(1.0, 0.5 * chk_cells * cfg.epsilon);
      cfg.validate();
      json verdicts = json::array();
      bool all_zero = true, all_partition = true;
      for (int s = 0; s < chk_seeds; ++s) {
        crtmap::SimConfig c2 = cfg;
        c2.seed = cfg.seed + s;
        crtmap::CellSequence cells = crtmap::sample_path(c2, 0);
        crtmap::MatedMap map = crtmap::build_map(cells);
        crtmap::OrientationAssignment a = crtmap::assign_orientations(map);
        crtmap::PartitionReport part = crtmap::check_partition(map, a);
        bool zero_good = true, zero_rew = true;
        crtmap::RngStream fr(c2.seed, 0, 0xF00D);
        for (int fi = 0; fi < chk_funcs; ++fi) {
          crtmap::VertexFunction vf(map.n);
          int placed = 0;
          for (std::int32_t v = 0; v < map.n && placed < 1000; ++v) {
            if (map.tainted[v]) continue;
            bool interior = true;
            for (std::int32_t sl = map.rot_start[v];
                 sl < map.rot_start[v + 1] && interior; ++sl)
              if (map.tainted[map.rot_nbr[sl]]) interior = false;
            if (!interior) continue;
            if ((fr.next_u64() & 1) == 0) continue;
            std::int64_t val =
                static_cast<std::int64_t>(fr.next_u64() % 201) - 100;
            if (val == 0) val = 7;
            vf.set(v, crtmap::Rational(val));
            ++placed;
          }
          if (!crtmap::check_identity_goodorientation(map, a, vf).is_zero())
            zero_good = false;
          if (!crtmap::check_identity_rewritenabla(map, a, vf).is_zero())
            zero_rew = false;
        }
        all_zero = all_zero && zero_good && zero_rew;
        all_partition = all_partition && part.ok;
        verdicts.push_back(json{{"seed", c2.seed},
                                {"residual_good_orientation", zero_good ? 0 : 1},
                                {"residual_rewritenabla", zero_rew ? 0 : 1},
                                {"partitions_ok", part.ok}});
      }
      json res;
      res["verdicts"] = verdicts;
      res["all_residuals_zero"] = all_zero;
      res["all_partitions_ok"] = all_partition;
      int code = (all_zero && all_partition) ? kExitOk : kExitStructural;
      return emit_report(chk_o, "check-identities", cfg, res, {}, wall(), code);
    }

    if (cc->parsed()) {
      crtmap::SimConfig cfg = to_config(cc_o);
      cfg.validate();
      crtmap::CellSequence cells = cells_for(cfg, 0);
      crtmap::MatedMap map = crtmap::build_map(cells);
      std::int32_t a = map.vertex_of_global(cc_range[0]);
      std::int32_t b = map.vertex_of_global(cc_range[1]);
      crtmap::InducedCellSubmap sub = crtmap::induce_submap(map, a, b);
      crtmap::EulerCheck eu = crtmap::euler_check(sub);
      crtmap::GaussBonnetCheck gb = crtmap::gauss_bonnet_check(map, sub);
      crtmap::BoundaryArcReport arcs = crtmap::boundary_arcs(sub);
      json res;
      res["perim"] = sub.perim;
      res["simple_boundary"] = sub.simple_boundary;
      res["internal_edges"] = sub.internal_edges.size();
      res["ext_degree_sum"] = gb.ext_degree_sum;
      res["total_curvature_units"] = gb.lhs;
      res["euler_constant"] =
          !eu.simple ? json("inconclusive")
          : eu.edges == eu.rhs_minus
              ? json(-3)
              : (eu.edges == eu.rhs_plus ? json(3) : json("neither"));
      res["gb_constant"] = !gb.simple ? json("inconclusive")
                           : gb.lhs == gb.rhs_plus6
                               ? json(6)
                               : (gb.lhs == gb.rhs_minus6 ? json(-6)
                                                          : json("neither"));
      res["arc_sums"] = json{{"PL", arcs.arc_sums[crtmap::kPL]},
                             {"PR", arcs.arc_sums[crtmap::kPR]},
                             {"FL", arcs.arc_sums[crtmap::kFL]},
                             {"FR", arcs.arc_sums[crtmap::kFR]}};
      return emit_report(cc_o, "cell-curvature", cfg, res, {}, wall(), kExitOk);
    }

    if (bs->parsed()) {
      crtmap::SimConfig cfg = to_config(bs_o);
      cfg.validate();
      std::vector<std::int32_t> diffs, nplus_all;
      std::vector<std::string> csv_rows;
      csv_rows.push_back(crtmap::csv_join({"replica", "band", "n_plus", "n_minus"}));
      for (int r = 0; r < cfg.replicas; ++r) {
        crtmap::BandCounter plus(
            crtmap::RecordChainSampler(cfg.epsilon, cfg.seed, r, 16));
        crtmap::BandCounter minus(
            crtmap::RecordChainSampler(cfg.epsilon, cfg.seed, r, 17));
        for (int k = 0; k < bs_bands; ++k) {
          int np = plus.next_band();
          int nm = minus.next_band();
          diffs.push_back(np - nm);
          nplus_all.push_back(np);
          if (!bs_csv.empty())
            csv_rows.push_back(crtmap::csv_join(
                {std::to_string(r), std::to_string(k), std::to_string(np),
                 std::to_string(nm)}));
        }
      }
      crtmap::AlphaEstimate alpha =
          crtmap::estimate_alpha(diffs, nplus_all, cfg.seed);
      crtmap::IidDiagnostics iid = crtmap::iid_diagnostics(nplus_all);
      std::vector<std::pair<std::string, std::string>> files;
      if (!bs_csv.empty()) {
        std::string table;
        for (auto& rrow : csv_rows) table += rrow;
        files.push_back({bs_csv, crtmap::write_file_hashed(bs_csv, table)});
      }
      json res;
      res["alpha"] = alpha.alpha;
      res["alpha_ci"] = json::array({alpha.alpha_lo, alpha.alpha_hi});
      res["sigma2"] = alpha.sigma2;
      res["tail_c"] = alpha.tail_c;
      res["tail_r2"] = alpha.tail_r2;
      res["heavy_tail_flag"] = alpha.heavy_tail_flag;
      res["autocorr"] = iid.autocorr;
      res["autocorr_se"] = iid.se;
      res["halves_ks_p"] = iid.halves.p_value;
      res["iid_ok"] = iid.ok;
      int code = iid.ok ? kExitOk : kExitStatistical;
      return emit_report(bs_o, "boundary-stats", cfg, res, files, wall(), code);
    }

    if (sc->parsed()) {
      crtmap::SimConfig cfg = to_config(sc_o);
      cfg.validate();
      double alpha = sc_alpha;
      if (alpha <= 0.0) {
        std::vector<std::int32_t> diffs, nplus;
        for (int r = 0; r < 64; ++r) {
          crtmap::BandCounter plus(
              crtmap::RecordChainSampler(cfg.epsilon, cfg.seed, r, 16));
          crtmap::BandCounter minus(
              crtmap::RecordChainSampler(cfg.epsilon, cfg.seed, r, 17));
          for (int k = 0; k < 500; ++k) {
            int np = plus.next_band();
            diffs.push_back(np - minus.next_band());
            nplus.push_back(np);
          }
        }
        alpha = crtmap::estimate_alpha(diffs, nplus, cfg.seed).alpha;
      }
      crtmap::ScalingReport rep = crtmap::cell_scaling_experiment(
          cfg, sc_eps, cfg.replicas, alpha);
      std::vector<std::pair<std::string, std::string>> files;
      if (!sc_csv.empty()) {
        std::string table = crtmap::csv_join({"epsilon", "replica", "stat", "lhat"});
        for (const auto& pt : rep.points)
          for (std::size_t i = 0; i < pt.stats.size(); ++i)
            table += crtmap::csv_join(
                {std::to_string(pt.epsilon), std::to_string(i),
                 std::to_string(pt.stats[i]), std::to_string(pt.lhat[i])});
        files.push_back({sc_csv, crtmap::write_file_hashed(sc_csv, table)});
      }
      if (!sc_svg.empty() && !rep.points.empty()) {
        std::string svg = crtmap::histogram_svg(
            rep.points.back().stats, 40,
            "eps^{1/4} (pi/3) total curvature, eps=" +
                std::to_string(rep.points.back().epsilon));
        files.push_back({sc_svg, crtmap::write_file_hashed(sc_svg, svg)});
      }
      json pts = json::array();
      for (const auto& pt : rep.points)
        pts.push_back(json{{"epsilon", pt.epsilon},
                           {"replicas", pt.replicas},
                           {"mean", pt.mean},
                           {"mean_se", pt.mean_se},
                           {"variance", pt.variance},
                           {"mixture_ks_p", pt.mixture_ks_p}});
      json res;
      res["alpha_used"] = alpha;
      res["points"] = pts;
      res["variance_ratios"] = rep.variance_ratios;
      res["mean_ok"] = rep.mean_ok;
      res["ratio_ok"] = rep.ratio_ok;
      int code = (rep.mean_ok && rep.ratio_ok) ? kExitOk : kExitStatistical;
      return emit_report(sc_o, "scaling-experiment", cfg, res, files, wall(), code);
    }

    if (em->parsed()) {
      crtmap::SimConfig cfg = to_config(em_o);
      cfg.validate();
      crtmap::CellSequence cells = cells_for(cfg, 0);
      crtmap::MatedMap map = crtmap::build_map(cells);
      std::int32_t a = map.vertex_of_global(em_range[0]);
      std::int32_t b = map.vertex_of_global(em_range[1]);
      crtmap::InducedCellSubmap sub = crtmap::induce_submap(map, a, b);
      crtmap::Embedding emb = crtmap::tutte_embed(map, sub, em_tol);
      crtmap::OrientationAssignment assign = crtmap::assign_orientations(map);
      crtmap::WeightedCurvatureResult w = crtmap::weighted_curvature_sum(
          map, sub, emb, assign, crtmap::make_field(em_field));
      std::vector<std::pair<std::string, std::string>> files;
      if (!em_svg.empty()) {
        std::string svg = crtmap::embedding_to_svg(map, sub, emb);
        files.push_back({em_svg, crtmap::write_file_hashed(em_svg, svg)});
      }
      json res;
      res["harmonic_residual"] = emb.residual;
      res["iterations"] = emb.iterations;
      res["weighted_sum"] = w.sum;
      res["identity_residual_num"] = w.residual.num;
      res["identity_residual_den"] = w.residual.den;
      res["support_size"] = w.support_size;
      int code = w.residual.is_zero() ? kExitOk : kExitStructural;
      return emit_report(em_o, "embed", cfg, res, files, wall(), code);
    }

    if (cal->parsed()) {
      crtmap::SimConfig cfg = to_config(cal_o);
      cfg.validate();
      std::vector<std::int32_t> diffs, nplus;
      for (int r = 0; r < cfg.replicas; ++r) {
        crtmap::BandCounter plus(
            crtmap::RecordChainSampler(cfg.epsilon, cfg.seed, r, 16));
        crtmap::BandCounter minus(
            crtmap::RecordChainSampler(cfg.epsilon, cfg.seed, r, 17));
        for (int k = 0; k < cal_bands; ++k) {
          int np = plus.next_band();
          diffs.push_back(np - minus.next_band());
          nplus.push_back(np);
        }
      }
      crtmap::AlphaEstimate alpha =
          crtmap::estimate_alpha(diffs, nplus, cfg.seed);
      json res;
      res["alpha"] = alpha.alpha;
      res["alpha_ci"] = json::array({alpha.alpha_lo, alpha.alpha_hi});
      res["sigma2"] = alpha.sigma2;
      res["band_pairs"] = diffs.size();
      return emit_report(cal_o, "calibrate", cfg, res, {}, wall(), kExitOk);
    }
  } catch (const crtmap::BandsIncompleteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStatistical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStructural;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStructural;
  }
  return kExitStructural;
}
