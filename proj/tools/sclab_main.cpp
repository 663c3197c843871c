#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sclab/closure.hpp"
#include "sclab/lab.hpp"
#include "sclab/svg.hpp"

using namespace sclab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
}

Rat parse_rat(const std::string& text, const char* what) {
  const auto q = Rat::from_string(text);
  if (!q) throw std::runtime_error(std::string(what) + ": not a rational: " + text);
  return *q;
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// Accepts the config-file object syntax ("point [x:y:z]", "line [a:b:c]",
// "conic [...]") and the affine point shorthand "(x, y)", whose coordinates
// may be any serialized real, e.g. "(sqrt(2), 1/3)".
GeomObject parse_object(const std::string& raw, const TowerPtr& tower) {
  const std::string text = trimmed(raw);
  if (!text.empty() && text.front() == '(' && text.back() == ')') {
    const std::string inner = text.substr(1, text.size() - 2);
    int depth = 0;
    std::size_t cut = std::string::npos;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      if (inner[i] == ')') --depth;
      if (inner[i] == ',' && depth == 0) {
        cut = i;
        break;
      }
    }
    if (cut == std::string::npos) throw std::runtime_error("expected \"(x, y)\": " + raw);
    const Real x = Real::parse(trimmed(inner.substr(0, cut)), tower);
    const Real y = Real::parse(trimmed(inner.substr(cut + 1)), tower);
    return GeomObject(HPoint::affine(x, y));
  }
  return parse_geom_object(text, tower);
}

HPoint parse_point(const std::string& text, const TowerPtr& tower) {
  const GeomObject obj = parse_object(text, tower);
  if (const HPoint* p = std::get_if<HPoint>(&obj)) return *p;
  throw std::runtime_error("expected a point, got: " + text);
}

Configuration default_config() {
  Configuration cfg;
  Mat3<Real> m;
  m << Real(1), Real(0), Real(0), Real(0), Real(1), Real(0), Real(0), Real(0), Real(-1);
  cfg.insert(GeomObject(Conic::from_matrix(m)), Provenance{});
  return cfg;
}

Configuration load_config(const std::string& path) {
  if (path.empty()) return default_config();
  return Configuration::load_file(path);
}

lang::Script load_script(const std::string& path) {
  const lang::ParseResult r = lang::parse_script(slurp(path));
  if (!r.errors.empty()) {
    for (const auto& e : r.errors)
      std::cerr << path << ":" << e.line << ":" << e.col << ": " << e.message << "\n";
    throw std::runtime_error("script does not parse");
  }
  return *r.script;
}

std::unique_ptr<Adversary> make_adversary(const std::string& flag, const TowerPtr& tower) {
  if (flag == "rational") return rational_adversary();
  if (flag.rfind("pullback:", 0) == 0) {
    const std::string args = flag.substr(9);
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("pullback adversary needs u,t (e.g. pullback:3/5,0)");
    const Rat u = parse_rat(args.substr(0, comma), "--adversary u");
    const Rat t = parse_rat(args.substr(comma + 1), "--adversary t");
    return pullback_adversary(circle_preserving_map(Real(u), Real(t), tower));
  }
  throw std::runtime_error("unknown adversary: " + flag + " (rational | pullback:u,t)");
}

void print_outcome(const Trace& t) {
  std::cout << "outcome: " << outcome_name(t.outcome) << "\n";
  std::cout << "moves: " << t.moves.size() << "\n";
  if (t.won_at >= 0) std::cout << "won after: " << t.won_at << "\n";
  if (!t.outputs.empty()) {
    std::cout << "outputs:";
    for (int id : t.outputs) std::cout << " " << id;
    std::cout << "\n";
  }
  if (!t.note.empty()) std::cout << "note: " << t.note << "\n";
}

int cmd_check(const std::string& script_path, const std::string& cfg_path) {
  const lang::Script sc = load_script(script_path);
  const auto diags =
      cfg_path.empty() ? lang::check_script(sc) : lang::check_script(sc, load_config(cfg_path));
  bool bad = false;
  for (const auto& d : diags) {
    std::cout << script_path << ":" << d.pos.line << ":" << d.pos.col << ": "
              << (d.error ? "error" : "warning") << ": " << d.message << "\n";
    bad = bad || d.error;
  }
  if (bad) return 1;
  std::cout << "ok\n";
  return 0;
}

int cmd_play(const std::string& script_path, const std::string& cfg_path,
             const std::string& adversary_flag, const std::string& target_text, long max_moves,
             const std::string& trace_out) {
  const lang::Script sc = load_script(script_path);
  Configuration cfg = load_config(cfg_path);
  const GeomObject target = parse_object(target_text, cfg.tower());
  const auto adv = make_adversary(adversary_flag, cfg.tower());
  const Trace t = play(sc, std::move(cfg), target, *adv, max_moves);
  print_outcome(t);
  if (!trace_out.empty()) save_trace_file(t, trace_out);
  return 0;
}

int cmd_closure(const std::string& cfg_path, int depth, const std::string& ops_flags,
                const std::string& stats_out) {
  const Configuration cfg = load_config(cfg_path);
  const auto ops = OpSet::parse(ops_flags);
  if (!ops) throw std::runtime_error("bad --ops: " + ops_flags);
  const auto [closed, stats] = closure_to_depth(cfg, depth, *ops, Budget::from_env());
  std::cout << "objects: " << closed.size() << "\n";
  std::cout << "fixed point: " << (stats.reached_fixed_point ? "yes" : "no") << "\n";
  std::cout << "depth completed: " << stats.depth_completed << "\n";
  if (!stats_out.empty()) spill(stats_out, stats.csv());
  return 0;
}

int cmd_probe(const std::string& cfg_path, const std::string& target_text, const std::string& eps,
              const std::string& ops_flags) {
  const Configuration cfg = load_config(cfg_path);
  const HPoint target = parse_point(target_text, cfg.tower());
  const auto ops = OpSet::parse(ops_flags);
  if (!ops) throw std::runtime_error("bad --ops: " + ops_flags);
  const ProbeResult r =
      density_probe(cfg, target, parse_rat(eps, "--eps"), *ops, Budget::from_env());
  std::cout << "explored: " << r.objects_explored << "\n";
  if (!r.witness) {
    std::cout << "no witness found (" << (r.budget_exhausted ? "budget exhausted" : "exhausted")
              << "); inconclusive\n";
    return 1;
  }
  std::cout << "witness: " << to_text(GeomObject(*r.witness)) << "\n";
  std::cout << "depth: " << r.witness_depth << "\n";
  return 0;
}

int cmd_replay(const std::string& trace_path) {
  const std::string original = slurp(trace_path);
  const Trace t = trace_from_text(original);
  replay_trace(t);
  if (trace_to_text(t) != original) {
    std::cout << "re-serialization differs\n";
    return 1;
  }
  std::cout << "replay ok: " << t.moves.size() << " moves\n";
  return 0;
}

int cmd_transform(const std::string& trace_path, const std::string& u, const std::string& t,
                  const std::string& out) {
  const Trace tr = load_trace_file(trace_path);
  const ProjMap map = circle_preserving_map(Real(parse_rat(u, "--u")), Real(parse_rat(t, "--t")),
                                            tr.cfg.tower());
  const TransformReport rep = transform_trace(tr, map);
  if (!rep.ok) {
    std::cout << "does not transport: " << rep.message << "\n";
    return 1;
  }
  std::cout << "transported " << rep.trace.moves.size() << " moves\n";
  if (!out.empty()) save_trace_file(rep.trace, out);
  return 0;
}

int cmd_diverge(const std::string& script_path, const std::string& cfg_path, const std::string& u,
                const std::string& t, long max_moves) {
  const lang::Script sc = load_script(script_path);
  Configuration cfg = load_config(cfg_path);
  const ProjMap map =
      circle_preserving_map(Real(parse_rat(u, "--u")), Real(parse_rat(t, "--t")), cfg.tower());
  const auto adv = rational_adversary();
  const auto w = find_test_divergence(sc, std::move(cfg), map, *adv, max_moves);
  if (!w) {
    std::cout << "no divergence found\n";
    return 1;
  }
  std::cout << "divergence: " << w->detail << "\n";
  return 0;
}

int cmd_derive(const std::vector<std::string>& seeds, const std::string& target_text,
               long max_objects) {
  Configuration scratch;  // a tower to host the parsed coordinates
  std::array<HPoint, 4> pts{HPoint::affine(Real(0), Real(0)), HPoint::affine(Real(0), Real(0)),
                            HPoint::affine(Real(0), Real(0)), HPoint::affine(Real(0), Real(0))};
  for (int i = 0; i < 4; ++i) pts[i] = parse_point(seeds[i], scratch.tower());
  const HPoint target = parse_point(target_text, scratch.tower());
  const DeriveResult r = rational_plane_derivability(pts, target, max_objects);
  if (r.chain) {
    for (const auto& step : r.chain->steps) std::cout << step << "\n";
    std::cout << "depth: " << r.chain->depth << "\n";
    return 0;
  }
  if (r.fixed_point)
    std::cout << "not derivable: the closure is a fixed point of " << r.objects << " objects\n";
  else
    std::cout << "not found within " << max_objects << " objects; inconclusive\n";
  return 1;
}

int cmd_render(const std::string& input_path, const std::string& svg_out, unsigned precision) {
  const std::string bytes = slurp(input_path);
  RenderOptions opt;
  opt.precision_bits = precision;
  std::string svg;
  if (bytes.rfind("sclab-trace v1", 0) == 0)
    svg = render_svg(trace_from_text(bytes), opt);
  else
    svg = render_svg(Configuration::load_file(input_path), opt);
  spill(svg_out, svg);
  std::cout << "wrote " << svg_out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sclab: exact straightedge and compass games over constructible coordinates.\n"
      "Configurations default to a single unit circle when --cfg is omitted.\n"
      "Budgets come from SCLAB_MAX_OBJECTS, SCLAB_MAX_TOWER_LEVELS and\n"
      "SCLAB_MAX_EXPR_NODES; flags override them where offered."};
  app.require_subcommand(1);
  std::function<int()> action;

  std::string script_path, cfg_path, trace_path, target_text, out_path, ops_flags = "all";
  std::string adversary_flag = "rational", u_text, t_text, eps_text;
  std::vector<std::string> seed_texts;
  long max_moves = 1000, max_objects = 200000;
  int depth = 1;
  unsigned precision = 24;

  CLI::App* check = app.add_subcommand("check", "parse a script and run the static checks");
  check->add_option("script", script_path)->required();
  check->add_option("--cfg", cfg_path,
                    "configuration supplying the given types (omit to bind them as unknown)");
  check->callback([&] { action = [&] { return cmd_check(script_path, cfg_path); }; });

  CLI::App* playc = app.add_subcommand("play", "run a script as a game against an adversary");
  playc->add_option("script", script_path)->required();
  playc->add_option("--cfg", cfg_path);
  playc->add_option("--adversary", adversary_flag, "rational | pullback:u,t");
  playc->add_option("--target", target_text, "object text, e.g. \"point (1/2, 0)\"")->required();
  playc->add_option("--max-moves", max_moves);
  playc->add_option("--trace", out_path, "write the full trace here");
  playc->callback([&] {
    action = [&] {
      return cmd_play(script_path, cfg_path, adversary_flag, target_text, max_moves, out_path);
    };
  });

  CLI::App* closure = app.add_subcommand("closure", "grow a configuration to a fixed depth");
  closure->add_option("cfg", cfg_path)->required();
  closure->add_option("--depth", depth)->required();
  closure->add_option("--ops", ops_flags, "comma list: joins,meets,line_conic,conic_conic,compass");
  closure->add_option("--stats", out_path, "write per-depth counts as csv");
  closure->callback(
      [&] { action = [&] { return cmd_closure(cfg_path, depth, ops_flags, out_path); }; });

  CLI::App* probe = app.add_subcommand("probe", "search the closure near a target point");
  probe->add_option("cfg", cfg_path)->required();
  probe->add_option("--target", target_text)->required();
  probe->add_option("--eps", eps_text, "open box half-width, a rational")->required();
  probe->add_option("--ops", ops_flags);
  probe->callback([&] { action = [&] { return cmd_probe(cfg_path, target_text, eps_text, ops_flags); }; });

  CLI::App* replay = app.add_subcommand("replay", "re-execute a trace and demand bit equality");
  replay->add_option("trace", trace_path)->required();
  replay->callback([&] { action = [&] { return cmd_replay(trace_path); }; });

  CLI::App* transform = app.add_subcommand("transform", "map a trace through a circle-preserving map");
  transform->add_option("trace", trace_path)->required();
  transform->add_option("--u", u_text)->required();
  transform->add_option("--t", t_text)->required();
  transform->add_option("--out", out_path, "write the transported trace here");
  transform->callback(
      [&] { action = [&] { return cmd_transform(trace_path, u_text, t_text, out_path); }; });

  CLI::App* diverge = app.add_subcommand("diverge", "find a script test that flips under the map");
  diverge->add_option("script", script_path)->required();
  diverge->add_option("--cfg", cfg_path);
  diverge->add_option("--u", u_text)->required();
  diverge->add_option("--t", t_text)->required();
  diverge->add_option("--max-moves", max_moves);
  diverge->callback([&] {
    action = [&] { return cmd_diverge(script_path, cfg_path, u_text, t_text, max_moves); };
  });

  CLI::App* derive = app.add_subcommand("derive", "rational-plane derivability from four points");
  derive->add_option("points", seed_texts, "four seed points \"(x, y)\"")->expected(4)->required();
  derive->add_option("--target", target_text)->required();
  derive->add_option("--max-objects", max_objects);
  derive->callback(
      [&] { action = [&] { return cmd_derive(seed_texts, target_text, max_objects); }; });

  CLI::App* render = app.add_subcommand("render", "draw a configuration or trace as svg");
  render->add_option("input", trace_path, "config or trace file")->required();
  render->add_option("--svg", out_path)->required();
  render->add_option("--precision", precision, "coordinate precision in bits");
  render->callback([&] { action = [&] { return cmd_render(trace_path, out_path, precision); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
