// rbox_main.cpp
// Command-line surface for the rotated-box toolkit: label-assignment dumps,
// gradient checks, annotation tiling, detection merging/NMS, and mAP reports.
// Every command is deterministic given its flags (and seed, where one
// applies); diagnostics go to stderr, data to files or stdout.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rbox/assignment.hpp"
#include "rbox/codec.hpp"
#include "rbox/dataio.hpp"
#include "rbox/eval.hpp"
#include "rbox/geometry.hpp"
#include "rbox/losses.hpp"
#include "rbox/postprocess.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultLevels = "8:0:64,16:64:128,32:128:256,64:256:512,128:512:inf";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// "stride:min:max" triples, comma separated; "inf" accepted for the top max.
std::vector<rbox::LevelSpec> parse_levels(const std::string& text, double image_w,
                                          double image_h) {
  std::vector<rbox::LevelSpec> levels;
  std::stringstream stream(text);
  std::string triple;
  while (std::getline(stream, triple, ',')) {
    if (triple.empty()) continue;
    rbox::LevelSpec spec;
    double stride = 0, lo = 0, hi = 0;
    char c1 = 0, c2 = 0;
    std::istringstream item(triple);
    if (!(item >> stride >> c1 >> lo >> c2) || c1 != ':' || c2 != ':') {
      throw std::runtime_error("bad --levels triple '" + triple + "'");
    }
    std::string rest;
    item >> rest;
    hi = rest == "inf" ? std::numeric_limits<double>::infinity() : std::stod(rest);
    spec.stride = stride;
    spec.range_min = lo;
    spec.range_max = hi;
    spec.grid_w = static_cast<int>(std::ceil(image_w / stride));
    spec.grid_h = static_cast<int>(std::ceil(image_h / stride));
    levels.push_back(spec);
  }
  rbox::validate_pyramid(levels);
  return levels;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Expands "--config FILE" into "--key=value" tokens inserted at the config
// option's position. Keys given explicitly on the command line win; keys the
// subcommand does not define are rejected by the parser afterwards.
std::vector<std::string> expand_config_file(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    std::istringstream stream(read_file(args[i + 1]));
    std::vector<std::string> extra;
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
        throw std::runtime_error(args[i + 1] + ":" + std::to_string(line_no) +
                                 ": expected 'key = value'");
      }
      const std::string key = "--" + trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      const bool overridden = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == key || a.rfind(key + "=", 0) == 0;
      });
      if (!overridden) extra.push_back(key + "=" + value);
    }
    args.insert(args.begin() + i + 2, extra.begin(), extra.end());
    break;
  }
  return args;
}

// ---------------------------------------------------------------------------
// assign

struct AssignArgs {
  std::string annotations;
  std::string out;
  std::string levels = kDefaultLevels;
  double image_w = 1024.0;
  double image_h = 1024.0;
  rbox::AssignConfig cfg;
};

int run_assign(const AssignArgs& args) {
  const std::vector<rbox::Annotation> annots = rbox::parse_dota(read_file(args.annotations));
  std::vector<std::string> class_names;
  std::vector<rbox::GroundTruth> targets;
  for (const rbox::Annotation& annot : annots) {
    const auto it = std::find(class_names.begin(), class_names.end(), annot.category);
    int cls = static_cast<int>(it - class_names.begin());
    if (it == class_names.end()) class_names.push_back(annot.category);
    targets.push_back({rbox::min_area_obb(annot.quad), cls});
  }
  const std::vector<rbox::LevelSpec> levels = parse_levels(args.levels, args.image_w, args.image_h);
  const rbox::AssignmentMap map = rbox::build_assignment(targets, levels, args.cfg);

  std::ostringstream dump;
  std::ostringstream target_lines;
  for (size_t t = 0; t < targets.size(); ++t) {
    target_lines << "target " << t << " class " << targets[t].class_index << " long "
                 << format_real(targets[t].obb.long_edge()) << " short "
                 << format_real(targets[t].obb.short_edge()) << " levels";
    for (int level : rbox::assign_levels(targets[t].obb, levels, args.cfg)) {
      target_lines << ' ' << level;
    }
    target_lines << '\n';
  }
  dump << "# assignment dump\n";
  dump << "image " << format_real(args.image_w) << ' ' << format_real(args.image_h) << '\n';
  dump << "levels " << levels.size() << '\n';
  dump << "targets " << targets.size() << '\n';
  for (size_t i = 0; i < class_names.size(); ++i) {
    dump << "class " << i << ' ' << class_names[i] << '\n';
  }
  dump << target_lines.str();
  dump << "config c_threshold " << format_real(args.cfg.c_threshold) << " shrink "
       << (args.cfg.use_shrink ? 1 : 0) << " mls_short_ratio "
       << format_real(args.cfg.mls_short_ratio) << '\n';
  int total_pos = 0;
  for (size_t li = 0; li < map.levels.size(); ++li) {
    const rbox::LevelAssignment& level = map.levels[li];
    dump << "level " << li << " stride " << format_real(level.spec.stride) << " grid "
         << level.spec.grid_h << ' ' << level.spec.grid_w << " range "
         << format_real(level.spec.range_min) << ' ' << format_real(level.spec.range_max) << '\n';
    int level_pos = 0;
    for (int r = 0; r < level.spec.grid_h; ++r) {
      for (int c = 0; c < level.spec.grid_w; ++c) {
        const rbox::AssignedCell& cell = level.at(r, c);
        if (!cell.positive()) continue;
        ++level_pos;
        dump << "pos " << li << ' ' << r << ' ' << c << " class " << cell.class_index << " j "
             << format_real(cell.j_value) << " target " << cell.target << '\n';
      }
    }
    dump << "summary level " << li << " positives " << level_pos << '\n';
    total_pos += level_pos;
  }
  dump << "summary total_positives " << total_pos << '\n';
  const std::vector<int> orphans = rbox::unassigned_targets(map, targets.size());
  dump << "unassigned_count " << orphans.size() << '\n';
  for (int t : orphans) {
    dump << "unassigned " << t << " class " << targets[t].class_index << '\n';
  }

  if (args.out.empty()) {
    std::cout << dump.str();
  } else {
    write_file(args.out, dump.str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  int count = 1000;
  unsigned long long seed = 0;
  double step = 1e-5;
  double tolerance = 1e-4;
};

rbox::Obb random_obb(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> center(-20.0, 20.0);
  std::uniform_real_distribution<double> size(4.0, 60.0);
  std::uniform_real_distribution<double> angle(0.02, rbox::kHalfPi - 0.02);
  double w = size(rng);
  double h = size(rng);
  while (std::abs(w - h) < 0.5) h = size(rng);  // square boxes have a flat theta direction
  return rbox::Obb(center(rng), center(rng), w, h, angle(rng));
}

std::array<double, 5> finite_difference_grad(const rbox::Obb& pred, const rbox::Obb& gt,
                                             double step) {
  const auto loss_at = [&](int i, double delta) {
    double p[5] = {pred.cx, pred.cy, pred.w, pred.h, pred.theta};
    p[i] += delta;
    return rbox::prob_iou_loss(rbox::Obb(p[0], p[1], p[2], p[3], p[4]), gt);
  };
  std::array<double, 5> grad{};
  for (int i = 0; i < 5; ++i) {
    grad[i] = (loss_at(i, step) - loss_at(i, -step)) / (2.0 * step);
  }
  return grad;
}

int run_gradcheck(const GradcheckArgs& args) {
  std::mt19937_64 rng(args.seed);
  double max_err = 0.0;
  int degenerate = 0;
  for (int n = 0; n < args.count; ++n) {
    const rbox::Obb gt = random_obb(rng);
    rbox::Obb pred = random_obb(rng);
    // keep the pair clear of the H = 0 singularity
    while (std::hypot(pred.cx - gt.cx, pred.cy - gt.cy) < 1.0) {
      pred = rbox::Obb(pred.cx + 2.0, pred.cy, pred.w, pred.h, pred.theta);
    }
    const rbox::ProbIouGrad analytic = rbox::prob_iou_grad(pred, gt);
    if (analytic.degenerate) {
      ++degenerate;
      continue;
    }
    const std::array<double, 5> numeric = finite_difference_grad(pred, gt, args.step);
    for (int i = 0; i < 5; ++i) {
      const double scale = std::max({std::abs(analytic.d[i]), std::abs(numeric[i]), 1e-6});
      max_err = std::max(max_err, std::abs(analytic.d[i] - numeric[i]) / scale);
    }
  }
  char line[160];
  std::snprintf(line, sizeof(line), "gradcheck count %d seed %llu\n", args.count, args.seed);
  std::cout << line;
  std::snprintf(line, sizeof(line), "degenerate %d\n", degenerate);
  std::cout << line;
  std::snprintf(line, sizeof(line), "max_rel_err %.6e\n", max_err);
  std::cout << line;
  const bool ok = max_err <= args.tolerance;
  std::cout << (ok ? "status ok\n" : "status fail\n");
  return ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// tile

struct TileArgs {
  std::string annotations;  // optional; file or directory of files
  std::string out;          // directory (required with annotations)
  double image_w = 0.0;
  double image_h = 0.0;
  double patch = 1024.0;
  double gap = 512.0;
  double min_fraction = 0.5;
};

int run_tile(const TileArgs& args) {
  const std::vector<rbox::TileWindow> windows =
      rbox::tile_plan(args.image_w, args.image_h, args.patch, args.gap);

  std::vector<std::pair<std::string, std::vector<rbox::Annotation>>> images;
  if (!args.annotations.empty()) {
    if (args.out.empty()) throw std::runtime_error("--out is required when clipping annotations");
    if (fs::is_directory(args.annotations)) {
      for (const auto& entry : fs::directory_iterator(args.annotations)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
          images.push_back({entry.path().stem().string(),
                            rbox::parse_dota(read_file(entry.path().string()))});
        }
      }
      std::sort(images.begin(), images.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    } else {
      images.push_back({fs::path(args.annotations).stem().string(),
                        rbox::parse_dota(read_file(args.annotations))});
    }
  }
  if (!args.out.empty()) fs::create_directories(args.out);

  std::ostringstream manifest;
  manifest << "# tile manifest\n";
  manifest << "dims " << format_real(args.image_w) << ' ' << format_real(args.image_h)
           << " patch " << format_real(args.patch) << " gap " << format_real(args.gap)
           << " windows " << windows.size() << '\n';
  const auto emit_windows = [&](const std::string& stem, const std::vector<rbox::Annotation>* annots) {
    for (size_t i = 0; i < windows.size(); ++i) {
      const rbox::TileWindow& win = windows[i];
      std::string file = "-";
      size_t kept = 0;
      if (annots) {
        const std::vector<rbox::Annotation> clipped =
            rbox::clip_annotations(*annots, win, args.min_fraction);
        kept = clipped.size();
        char name[192];
        std::snprintf(name, sizeof(name), "%s__%lld_%lld.txt", stem.c_str(),
                      static_cast<long long>(std::llround(win.x0)),
                      static_cast<long long>(std::llround(win.y0)));
        file = name;
        write_file((fs::path(args.out) / file).string(), rbox::write_annotations(clipped));
      }
      manifest << "window " << stem << ' ' << i << ' ' << format_real(win.x0) << ' '
               << format_real(win.y0) << ' ' << format_real(win.width) << ' '
               << format_real(win.height) << ' ' << kept << ' ' << file << '\n';
    }
  };
  if (images.empty()) {
    emit_windows("image", nullptr);
  } else {
    for (const auto& [stem, annots] : images) emit_windows(stem, &annots);
  }

  if (args.out.empty()) {
    std::cout << manifest.str();
  } else {
    write_file((fs::path(args.out) / "manifest.txt").string(), manifest.str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string results_dir;
  std::string gt_dir;
  std::string metric = "voc07";
  std::string classes;  // optional comma-separated override
  std::string out;      // optional CSV path
  rbox::EvalConfig cfg;
};

int run_eval(const EvalArgs& args) {
  rbox::EvalConfig cfg = args.cfg;
  if (args.metric == "voc07") {
    cfg.metric = rbox::Metric::kVoc07;
  } else if (args.metric == "voc12") {
    cfg.metric = rbox::Metric::kVoc12;
  } else {
    throw std::runtime_error("unknown metric '" + args.metric + "'");
  }

  std::map<std::string, rbox::ImageEvalInput> images;
  std::vector<std::string> class_names;

  for (const auto& entry : fs::directory_iterator(args.gt_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const std::string image_id = entry.path().stem().string();
    for (const rbox::Annotation& annot : rbox::parse_dota(read_file(entry.path().string()))) {
      if (std::find(class_names.begin(), class_names.end(), annot.category) ==
          class_names.end()) {
        class_names.push_back(annot.category);
      }
      const int cls = static_cast<int>(std::find(class_names.begin(), class_names.end(),
                                                 annot.category) -
                                       class_names.begin());
      images[image_id].ground_truths.push_back(
          {cls, {rbox::min_area_obb(annot.quad), annot.difficult != 0}});
    }
  }
  std::sort(class_names.begin(), class_names.end());
  if (!args.classes.empty()) {
    class_names.clear();
    std::stringstream stream(args.classes);
    std::string name;
    while (std::getline(stream, name, ',')) {
      if (!name.empty()) class_names.push_back(name);
    }
  }
  if (class_names.empty()) throw std::runtime_error("no classes found in " + args.gt_dir);
  // re-key ground-truth class indices against the final class order
  {
    std::map<std::string, rbox::ImageEvalInput> rekeyed;
    for (const auto& entry : fs::directory_iterator(args.gt_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      const std::string image_id = entry.path().stem().string();
      rekeyed[image_id];  // images with no kept annotations still participate
      for (const rbox::Annotation& annot : rbox::parse_dota(read_file(entry.path().string()))) {
        const auto it = std::find(class_names.begin(), class_names.end(), annot.category);
        if (it == class_names.end()) continue;
        rekeyed[image_id].ground_truths.push_back(
            {static_cast<int>(it - class_names.begin()),
             {rbox::min_area_obb(annot.quad), annot.difficult != 0}});
      }
    }
    images = std::move(rekeyed);
  }

  for (size_t cls = 0; cls < class_names.size(); ++cls) {
    fs::path path = fs::path(args.results_dir) / (class_names[cls] + ".txt");
    if (!fs::exists(path)) path = fs::path(args.results_dir) / ("Task1_" + class_names[cls] + ".txt");
    if (!fs::exists(path)) {
      std::cerr << "warning: no result file for class '" << class_names[cls]
                << "', treating as zero detections\n";
      continue;
    }
    std::istringstream stream(read_file(path.string()));
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const std::vector<std::string> tokens = rbox::detail::split_tokens(line);
      if (tokens.empty()) continue;
      if (tokens.size() != 10) {
        throw rbox::ParseError(line_no, "expected 'image_id score x1 y1 ... y4' in " +
                                            path.filename().string());
      }
      rbox::Polygon quad;
      const double score = rbox::detail::parse_real(tokens[1], line_no);
      for (int i = 0; i < 4; ++i) {
        quad.push_back({rbox::detail::parse_real(tokens[2 + 2 * i], line_no),
                        rbox::detail::parse_real(tokens[3 + 2 * i], line_no)});
      }
      images[tokens[0]].detections.push_back(
          {rbox::min_area_obb(quad), static_cast<int>(cls), score});
    }
  }

  const rbox::DatasetEval result = rbox::evaluate_dataset(images, class_names, cfg);

  std::ostringstream csv;
  csv << "class,ap,n_gt,n_det\n";
  for (const rbox::ClassEval& ce : result.per_class) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s ap %.6f  gt %6d  det %6d", ce.name.c_str(), ce.ap,
                  ce.n_gt, ce.n_det);
    std::cout << line << '\n';
    std::snprintf(line, sizeof(line), "%s,%.6f,%d,%d\n", ce.name.c_str(), ce.ap, ce.n_gt,
                  ce.n_det);
    csv << line;
  }
  char map_line[64];
  std::snprintf(map_line, sizeof(map_line), "mAP %.6f", result.map);
  std::cout << map_line << '\n';
  std::snprintf(map_line, sizeof(map_line), "mAP,%.6f\n", result.map);
  csv << map_line;
  if (!args.out.empty()) write_file(args.out, csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// nms

struct NmsArgs {
  std::string detections;
  std::string out;
  double iou_threshold = 0.1;
  double score_threshold = 0.1;
};

// Input line: image_id class score offset_x offset_y x1 y1 ... y4
// Coordinates are patch-local; offsets place the patch in the source image.
int run_nms(const NmsArgs& args) {
  std::istringstream stream(read_file(args.detections));
  std::string line;
  int line_no = 0;
  std::vector<std::string> class_names;
  // image -> per-origin detection lists
  std::map<std::string, std::map<std::pair<double, double>, std::vector<rbox::Detection>>> images;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    const std::vector<std::string> tokens = rbox::detail::split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 13) {
      throw rbox::ParseError(line_no,
                             "expected 'image_id class score offset_x offset_y x1 y1 ... y4'");
    }
    const auto it = std::find(class_names.begin(), class_names.end(), tokens[1]);
    const int cls = static_cast<int>(it - class_names.begin());
    if (it == class_names.end()) class_names.push_back(tokens[1]);
    const double score = rbox::detail::parse_real(tokens[2], line_no);
    const double off_x = rbox::detail::parse_real(tokens[3], line_no);
    const double off_y = rbox::detail::parse_real(tokens[4], line_no);
    rbox::Polygon quad;
    for (int i = 0; i < 4; ++i) {
      quad.push_back({rbox::detail::parse_real(tokens[5 + 2 * i], line_no),
                      rbox::detail::parse_real(tokens[6 + 2 * i], line_no)});
    }
    images[tokens[0]][{off_x, off_y}].push_back({rbox::min_area_obb(quad), cls, score});
  }

  std::map<std::string, std::string> class_files;
  for (const auto& [image_id, patches] : images) {
    std::vector<std::pair<rbox::PatchOrigin, std::vector<rbox::Detection>>> per_patch;
    for (const auto& [origin, dets] : patches) {
      per_patch.push_back({{origin.first, origin.second}, dets});
    }
    const std::vector<rbox::Detection> merged =
        rbox::merge_patches(per_patch, args.iou_threshold, args.score_threshold);
    for (const auto& [cls_name, lines] : rbox::write_results(merged, class_names, image_id)) {
      for (const std::string& out_line : lines) class_files[cls_name] += out_line + "\n";
    }
  }

  fs::create_directories(args.out);
  for (const auto& [cls_name, content] : class_files) {
    write_file((fs::path(args.out) / (cls_name + ".txt")).string(), content);
  }
  std::cerr << "wrote " << class_files.size() << " class file(s) to " << args.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotated-box detection toolkit"};
  app.require_subcommand(1);

  AssignArgs assign_args;
  CLI::App* assign = app.add_subcommand("assign", "dump the label assignment for a scene");
  assign->add_option("annotations", assign_args.annotations, "DOTA annotation file")
      ->required()
      ->check(CLI::ExistingFile);
  assign->add_option("--out", assign_args.out, "dump path (default: stdout)");
  assign->add_option("--levels", assign_args.levels, "stride:min:max triples, comma separated");
  assign->add_option("--width", assign_args.image_w, "image width in pixels");
  assign->add_option("--height", assign_args.image_h, "image height in pixels");
  assign->add_option("--c-threshold", assign_args.cfg.c_threshold, "ellipse sampling threshold");
  assign->add_flag("--shrink,!--no-shrink", assign_args.cfg.use_shrink,
                   "shrink the sampling ellipse for elongated boxes");
  assign->add_option("--mls-ratio", assign_args.cfg.mls_short_ratio,
                     "short-edge/stride ratio enabling multi-level sampling");
  assign->add_flag("--j-shrink", assign_args.cfg.j_use_shrink,
                   "evaluate the J measure with the shrunk covariance");
  assign->add_option("--config", "config file with key = value lines")->check(CLI::ExistingFile);

  GradcheckArgs grad_args;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  gradcheck->add_option("--count", grad_args.count, "number of random pairs")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", grad_args.seed, "random seed");
  gradcheck->add_option("--config", "config file with key = value lines")->check(CLI::ExistingFile);

  TileArgs tile_args;
  CLI::App* tile = app.add_subcommand("tile", "plan patch windows and clip annotations");
  tile->add_option("annotations", tile_args.annotations,
                   "DOTA annotation file or directory of files (optional)")
      ->check(CLI::ExistingPath);
  tile->add_option("--out", tile_args.out, "output directory");
  tile->add_option("--width", tile_args.image_w, "image width in pixels")->required();
  tile->add_option("--height", tile_args.image_h, "image height in pixels")->required();
  tile->add_option("--patch", tile_args.patch, "patch size in pixels");
  tile->add_option("--gap", tile_args.gap, "overlap between adjacent patches");
  tile->add_option("--min-fraction", tile_args.min_fraction,
                   "minimum kept area fraction for clipped annotations");
  tile->add_option("--config", "config file with key = value lines")->check(CLI::ExistingFile);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score detections against ground truth");
  eval->add_option("--results", eval_args.results_dir, "directory of per-class result files")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--gt", eval_args.gt_dir, "directory of per-image annotation files")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--metric", eval_args.metric, "voc07 or voc12");
  eval->add_option("--iou-thresh", eval_args.cfg.iou_threshold, "matching IoU threshold");
  eval->add_flag("--skip-difficult,!--no-skip-difficult", eval_args.cfg.skip_difficult,
                 "ignore difficult ground truths");
  eval->add_option("--classes", eval_args.classes, "comma-separated class list override");
  eval->add_option("--out", eval_args.out, "CSV report path");
  eval->add_option("--config", "config file with key = value lines")->check(CLI::ExistingFile);

  NmsArgs nms_args;
  CLI::App* nms = app.add_subcommand("nms", "merge per-patch detections and suppress duplicates");
  nms->add_option("detections", nms_args.detections, "detections file")
      ->required()
      ->check(CLI::ExistingFile);
  nms->add_option("--out", nms_args.out, "output directory for per-class result files")
      ->required();
  nms->add_option("--iou-thresh", nms_args.iou_threshold, "NMS IoU threshold");
  nms->add_option("--score-thresh", nms_args.score_threshold, "confidence threshold");
  nms->add_option("--config", "config file with key = value lines")->check(CLI::ExistingFile);

  try {
    std::vector<std::string> args = expand_config_file(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed vectors
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (assign->parsed()) return run_assign(assign_args);
    if (gradcheck->parsed()) return run_gradcheck(grad_args);
    if (tile->parsed()) return run_tile(tile_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (nms->parsed()) return run_nms(nms_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
