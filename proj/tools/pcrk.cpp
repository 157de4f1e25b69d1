#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "pcrk/cloud_ops.hpp"
#include "pcrk/errors.hpp"
#include "pcrk/eval.hpp"
#include "pcrk/fitter.hpp"
#include "pcrk/io.hpp"
#include "pcrk/metrics.hpp"
#include "pcrk/occlusion.hpp"
#include "pcrk/projection.hpp"
#include "pcrk/refine.hpp"
#include "pcrk/rng.hpp"

namespace {

namespace fs = std::filesystem;

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw pcrk::IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pcrk::IoError("cannot open " + path + " for writing");
  out << content;
  if (!out.good()) throw pcrk::IoError("write failed: " + path);
}

void write_run_config(const CLI::App* sub, const std::string& out_dir) {
  write_text(join_path(out_dir, "run_config.txt"), sub->config_to_str(true, false));
}

pcrk::ViewSpec view_by_name(const std::string& name, const pcrk::Camera* cam) {
  if (name == "ortho-xy") return pcrk::ViewSpec::ortho_xy();
  if (name == "ortho-yz") return pcrk::ViewSpec::ortho_yz();
  if (name == "ortho-xz") return pcrk::ViewSpec::ortho_xz();
  if (name == "camera") {
    if (cam == nullptr)
      throw std::invalid_argument("view 'camera' requires --camera");
    return pcrk::ViewSpec::perspective(*cam);
  }
  throw std::invalid_argument("unknown view '" + name +
                              "' (expected ortho-xy, ortho-yz, ortho-xz, or camera)");
}

// ---- fit ----

struct FitCli {
  std::string target_path, mask_path, camera_path, init_cloud_path, out_dir;
  std::string init_name = "sphere";
  std::vector<std::string> view_names{"ortho-xy", "ortho-xz"};
  pcrk::FitConfig cfg;
};

int run_fit(const FitCli& a, const CLI::App* sub) {
  if (a.mask_path.empty() != a.camera_path.empty())
    throw std::invalid_argument("--mask and --camera must be given together");

  const pcrk::PointCloud target = pcrk::read_cloud_any(a.target_path);
  pcrk::BinaryMask mask;
  pcrk::Camera cam;
  const bool with_silhouette = !a.mask_path.empty();
  if (with_silhouette) {
    mask = pcrk::read_pgm_mask(a.mask_path);
    cam = pcrk::read_camera_txt(a.camera_path);
  }

  pcrk::FitConfig cfg = a.cfg;
  cfg.views.clear();
  for (const auto& name : a.view_names)
    cfg.views.push_back(view_by_name(name, with_silhouette ? &cam : nullptr));

  pcrk::PointCloud explicit_init;
  const pcrk::PointCloud* init_ptr = nullptr;
  if (a.init_name == "sphere") {
    cfg.init = pcrk::InitMode::UnitSphere;
  } else if (a.init_name == "cube") {
    cfg.init = pcrk::InitMode::UnitCube;
  } else if (a.init_name == "cloud") {
    if (a.init_cloud_path.empty())
      throw std::invalid_argument("--init cloud requires --init-cloud");
    const pcrk::PointCloud source = pcrk::read_cloud_any(a.init_cloud_path);
    pcrk::SeededRng init_rng(cfg.seed);
    explicit_init = pcrk::init_points(cfg.n_points, pcrk::InitMode::FromCloud, init_rng, &source);
    cfg.init = pcrk::InitMode::FromCloud;
    init_ptr = &explicit_init;
  } else {
    throw std::invalid_argument("unknown init '" + a.init_name +
                                "' (expected sphere, cube, or cloud)");
  }

  ensure_out_dir(a.out_dir);
  write_run_config(sub, a.out_dir);

  const pcrk::FitTrace trace = pcrk::fit(target, with_silhouette ? &mask : nullptr,
                                         with_silhouette ? &cam : nullptr, cfg, init_ptr);

  pcrk::write_xyz(join_path(a.out_dir, "final.xyz"), trace.final_cloud);
  std::ostringstream csv;
  csv << "iter,total,rec,silhouette,proj\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    csv << i << ',' << pcrk::format_double(it.total) << ',' << pcrk::format_double(it.rec) << ','
        << pcrk::format_double(it.silhouette) << ',' << pcrk::format_double(it.proj) << '\n';
  }
  write_text(join_path(a.out_dir, "trace.csv"), csv.str());

  std::printf("fit: %zu iterations, final total %s\n", trace.iterations.size(),
              pcrk::format_double(trace.final_total).c_str());
  return 0;
}

// ---- refine ----

struct RefineCli {
  std::string input_path, out_dir;
  pcrk::RefineConfig cfg;
  std::uint64_t seed = 0;
  bool emit_mesh = false;
};

int run_refine(const RefineCli& a, const CLI::App* sub) {
  const pcrk::PointCloud input = pcrk::read_cloud_any(a.input_path);
  ensure_out_dir(a.out_dir);
  write_run_config(sub, a.out_dir);

  pcrk::SeededRng rng(a.seed);
  const pcrk::RefineResult result = pcrk::refine_pipeline(input, a.cfg, rng);

  pcrk::write_xyz(join_path(a.out_dir, "final.xyz"), result.points);
  if (a.emit_mesh) {
    pcrk::write_obj(join_path(a.out_dir, "surface.obj"), result.surface);
    pcrk::write_obj(join_path(a.out_dir, "smoothed.obj"), result.smoothed);
  }
  std::printf("refine: %zu points out, surface %zu faces\n", result.points.size(),
              result.smoothed.faces.size());
  return 0;
}

// ---- eval ----

struct EvalCli {
  std::string pred_path, gt_path, list_path, pre_rotation_path, out_dir;
  std::string protocol_name = "viewer";
  std::string chamfer_norm = "squared";
  std::size_t n = 0;  // 0 keeps the protocol default
  double scale = 1.0;
  std::uint64_t seed = 0;
};

std::vector<std::pair<pcrk::PointCloud, pcrk::PointCloud>> read_pair_list(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pcrk::IoError("cannot open " + path);
  std::vector<std::pair<pcrk::PointCloud, pcrk::PointCloud>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size())
      throw pcrk::IoError(path + ": line " + std::to_string(line_no) +
                          ": expected 'pred_path,gt_path'");
    pairs.emplace_back(pcrk::read_cloud_any(line.substr(0, comma)),
                       pcrk::read_cloud_any(line.substr(comma + 1)));
  }
  return pairs;
}

int run_eval(const EvalCli& a, const CLI::App* sub) {
  std::vector<std::pair<pcrk::PointCloud, pcrk::PointCloud>> pairs;
  if (!a.list_path.empty()) {
    pairs = read_pair_list(a.list_path);
    if (pairs.empty()) throw pcrk::IoError(a.list_path + ": no pairs listed");
  } else {
    if (a.pred_path.empty() || a.gt_path.empty())
      throw std::invalid_argument("need --pred and --gt, or --list");
    pairs.emplace_back(pcrk::read_cloud_any(a.pred_path), pcrk::read_cloud_any(a.gt_path));
  }

  pcrk::Protocol proto;
  if (a.protocol_name == "viewer") {
    proto = pcrk::Protocol::viewer_centered();
  } else if (a.protocol_name == "object") {
    proto = pcrk::Protocol::object_centered();
  } else if (a.protocol_name == "pix3d") {
    Eigen::Matrix3d pre = Eigen::Matrix3d::Identity();
    if (!a.pre_rotation_path.empty()) pre = pcrk::read_matrix3_txt(a.pre_rotation_path);
    proto = pcrk::Protocol::pix3d(pre);
  } else {
    throw std::invalid_argument("unknown protocol '" + a.protocol_name +
                                "' (expected viewer, object, or pix3d)");
  }
  if (a.n > 0) proto.n = a.n;
  if (a.chamfer_norm == "linear") {
    proto.chamfer_linear = true;
  } else if (a.chamfer_norm != "squared") {
    throw std::invalid_argument("unknown chamfer norm '" + a.chamfer_norm +
                                "' (expected squared or linear)");
  }

  ensure_out_dir(a.out_dir);
  write_run_config(sub, a.out_dir);

  pcrk::SeededRng rng(a.seed);
  const pcrk::BatchResult batch = pcrk::evaluate_batch(pairs, proto, rng);
  for (const auto& failure : batch.failures)
    std::fprintf(stderr, "sample %zu failed: %s\n", failure.sample_id, failure.message.c_str());
  if (batch.records.empty()) throw std::runtime_error("eval: every sample failed");

  std::ostringstream csv;
  csv << "sample_id,cd,emd\n";
  for (const auto& record : batch.records)
    csv << record.sample_id << ',' << pcrk::format_double(a.scale * record.cd) << ','
        << pcrk::format_double(a.scale * record.emd) << '\n';
  csv << "mean," << pcrk::format_double(a.scale * batch.mean_cd) << ','
      << pcrk::format_double(a.scale * batch.mean_emd) << '\n';
  write_text(join_path(a.out_dir, "report.csv"), csv.str());

  std::printf("eval: mean cd %s emd %s over %zu samples (%zu failed)\n",
              pcrk::format_double(a.scale * batch.mean_cd).c_str(),
              pcrk::format_double(a.scale * batch.mean_emd).c_str(), batch.records.size(),
              batch.failures.size());
  return 0;
}

// ---- synth-occ ----

struct SynthOccCli {
  std::string image_path, mask_path, out_dir;
  std::vector<std::string> donor_images, donor_masks, backgrounds;
  std::size_t count = 1;
  double p_occlude = 0.5;
  double p_background = 0.5;
  int max_attempts = 50;
  std::uint64_t seed = 0;
};

int run_synth_occ(const SynthOccCli& a, const CLI::App* sub) {
  if (a.donor_images.size() != a.donor_masks.size())
    throw std::invalid_argument("--donor-image and --donor-mask counts differ");

  const pcrk::RgbImage image = pcrk::read_ppm(a.image_path);
  const pcrk::BinaryMask mask = pcrk::read_pgm_mask(a.mask_path);
  std::vector<pcrk::Donor> donors;
  donors.reserve(a.donor_images.size());
  for (std::size_t i = 0; i < a.donor_images.size(); ++i)
    donors.push_back({pcrk::read_ppm(a.donor_images[i]), pcrk::read_pgm_mask(a.donor_masks[i])});
  std::vector<pcrk::RgbImage> backgrounds;
  backgrounds.reserve(a.backgrounds.size());
  for (const auto& path : a.backgrounds) backgrounds.push_back(pcrk::read_ppm(path));

  ensure_out_dir(a.out_dir);
  write_run_config(sub, a.out_dir);

  std::ostringstream manifest;
  manifest << "# id donor paste_row paste_col occluded_fraction\n";
  char name[64];
  for (std::size_t i = 0; i < a.count; ++i) {
    pcrk::SeededRng rng(a.seed + i);
    const pcrk::OccludedSample sample = pcrk::compose_sample(
        image, mask, donors, backgrounds, a.p_occlude, a.p_background, rng, a.max_attempts);
    std::snprintf(name, sizeof(name), "image_%05zu.ppm", i);
    pcrk::write_ppm(join_path(a.out_dir, name), sample.image);
    std::snprintf(name, sizeof(name), "visible_%05zu.pgm", i);
    pcrk::write_pgm_mask(join_path(a.out_dir, name), sample.visible_mask);
    std::snprintf(name, sizeof(name), "full_%05zu.pgm", i);
    pcrk::write_pgm_mask(join_path(a.out_dir, name), sample.full_mask);
    manifest << i << ' ' << sample.donor_id << ' ' << sample.paste_row << ' ' << sample.paste_col
             << ' ' << pcrk::format_double(sample.occluded_fraction) << '\n';
  }
  write_text(join_path(a.out_dir, "manifest.txt"), manifest.str());
  std::printf("synth-occ: wrote %zu samples to %s\n", a.count, a.out_dir.c_str());
  return 0;
}

// ---- project ----

struct ProjectCli {
  std::string input_path, camera_path, out_path;
  std::string view_name = "ortho-xy";
};

int run_project(const ProjectCli& a) {
  const pcrk::PointCloud cloud = pcrk::read_cloud_any(a.input_path);
  pcrk::Camera cam;
  const bool with_camera = !a.camera_path.empty();
  if (with_camera) cam = pcrk::read_camera_txt(a.camera_path);
  const pcrk::ViewSpec view = view_by_name(a.view_name, with_camera ? &cam : nullptr);

  const pcrk::Point2Set projected = pcrk::project(cloud, view);
  std::ostringstream out;
  for (const auto& p : projected)
    out << pcrk::format_double(p.x()) << ' ' << pcrk::format_double(p.y()) << '\n';
  if (a.out_path.empty()) {
    std::fputs(out.str().c_str(), stdout);
  } else {
    write_text(a.out_path, out.str());
  }
  return 0;
}

// ---- metrics ----

struct MetricsCli {
  std::string metric, path_a, path_b;
  double epsilon = 1e-3;
  std::size_t cap = 256;
};

int run_metrics(const MetricsCli& a) {
  double value = 0.0;
  if (a.metric == "iou") {
    value = pcrk::iou(pcrk::read_pgm_mask(a.path_a), pcrk::read_pgm_mask(a.path_b));
  } else {
    const pcrk::PointCloud ca = pcrk::read_cloud_any(a.path_a);
    const pcrk::PointCloud cb = pcrk::read_cloud_any(a.path_b);
    if (a.metric == "chamfer") {
      value = pcrk::chamfer(ca, cb);
    } else if (a.metric == "chamfer-linear") {
      value = pcrk::chamfer_linear(ca, cb);
    } else if (a.metric == "emd") {
      value = pcrk::emd_approx(ca, cb, a.epsilon);
    } else if (a.metric == "emd-exact") {
      value = pcrk::emd_exact(ca, cb, a.cap);
    } else {
      throw std::invalid_argument(
          "unknown metric '" + a.metric +
          "' (expected chamfer, chamfer-linear, emd, emd-exact, or iou)");
    }
  }
  std::printf("%.6f\n", value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point cloud reconstruction and occlusion synthesis toolkit"};
  app.require_subcommand(1);

  FitCli fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a free point set to a target cloud");
  fit_cmd->set_config("--config");
  fit_cmd->allow_config_extras(false);
  fit_cmd->add_option("--target", fit_args.target_path, "target cloud (.xyz/.ply)")->required();
  fit_cmd->add_option("--out", fit_args.out_dir, "output directory")->required();
  fit_cmd->add_option("--mask", fit_args.mask_path, "silhouette mask (.pgm)");
  fit_cmd->add_option("--camera", fit_args.camera_path, "camera parameters for the mask");
  fit_cmd->add_option("--n", fit_args.cfg.n_points, "number of fitted points");
  fit_cmd->add_option("--iters", fit_args.cfg.max_iters, "optimization iterations");
  fit_cmd->add_option("--lr", fit_args.cfg.lr, "learning rate");
  fit_cmd->add_option("--beta1", fit_args.cfg.beta1, "first-moment decay");
  fit_cmd->add_option("--beta2", fit_args.cfg.beta2, "second-moment decay");
  fit_cmd->add_option("--adam-eps", fit_args.cfg.adam_eps, "denominator epsilon");
  fit_cmd->add_option("--w-rec", fit_args.cfg.weights.rec, "reconstruction term weight");
  fit_cmd->add_option("--w-sil", fit_args.cfg.weights.silhouette, "silhouette term weight");
  fit_cmd->add_option("--w-proj", fit_args.cfg.weights.proj, "reprojection term weight");
  fit_cmd->add_option("--views", fit_args.view_names,
                      "reprojection views (ortho-xy, ortho-yz, ortho-xz, camera)");
  fit_cmd->add_option("--init", fit_args.init_name, "initial layout: sphere, cube, or cloud");
  fit_cmd->add_option("--init-cloud", fit_args.init_cloud_path, "source cloud for --init cloud");
  fit_cmd->add_option("--seed", fit_args.cfg.seed, "random seed");

  RefineCli refine_args;
  CLI::App* refine_cmd =
      app.add_subcommand("refine", "surface-reconstruct, smooth, and resample a cloud");
  refine_cmd->set_config("--config");
  refine_cmd->allow_config_extras(false);
  refine_cmd->add_option("--input", refine_args.input_path, "input cloud (.xyz/.ply)")->required();
  refine_cmd->add_option("--out", refine_args.out_dir, "output directory")->required();
  refine_cmd->add_option("--knn", refine_args.cfg.knn_for_normals, "neighbors for normal fits");
  refine_cmd->add_option("--grid", refine_args.cfg.grid_resolution, "surface grid cells per axis");
  refine_cmd->add_option("--support", refine_args.cfg.support_factor,
                         "support radius as a multiple of each point's scale");
  refine_cmd->add_option("--min-faces", refine_args.cfg.min_component_faces,
                         "drop mesh components smaller than this");
  refine_cmd->add_option("--smooth-iters", refine_args.cfg.smooth_iters, "smoothing iterations");
  refine_cmd->add_option("--smooth-step", refine_args.cfg.smooth_step, "smoothing step size");
  refine_cmd->add_option("--resample", refine_args.cfg.resample_count, "output point count");
  refine_cmd->add_option("--seed", refine_args.seed, "random seed");
  refine_cmd->add_flag("--emit-mesh", refine_args.emit_mesh,
                       "also write surface.obj and smoothed.obj");

  EvalCli eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval_cmd->set_config("--config");
  eval_cmd->allow_config_extras(false);
  eval_cmd->add_option("--pred", eval_args.pred_path, "predicted cloud");
  eval_cmd->add_option("--gt", eval_args.gt_path, "ground-truth cloud");
  eval_cmd->add_option("--list", eval_args.list_path, "CSV of pred_path,gt_path pairs");
  eval_cmd->add_option("--out", eval_args.out_dir, "output directory")->required();
  eval_cmd->add_option("--protocol", eval_args.protocol_name, "viewer, object, or pix3d");
  eval_cmd->add_option("--n", eval_args.n, "points sampled per cloud (0 = protocol default)");
  eval_cmd->add_option("--pre-rotation", eval_args.pre_rotation_path,
                       "3x3 rotation applied to ground truth (pix3d)");
  eval_cmd->add_option("--chamfer-norm", eval_args.chamfer_norm, "squared or linear");
  eval_cmd->add_option("--scale", eval_args.scale, "display scaling for reported values");
  eval_cmd->add_option("--seed", eval_args.seed, "random seed");

  SynthOccCli synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth-occ", "generate occluded training samples");
  synth_cmd->set_config("--config");
  synth_cmd->allow_config_extras(false);
  synth_cmd->add_option("--image", synth_args.image_path, "object image (.ppm)")->required();
  synth_cmd->add_option("--mask", synth_args.mask_path, "object mask (.pgm)")->required();
  synth_cmd->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth_cmd->add_option("--donor-image", synth_args.donor_images, "donor image (repeatable)");
  synth_cmd->add_option("--donor-mask", synth_args.donor_masks, "donor mask (repeatable)");
  synth_cmd->add_option("--background", synth_args.backgrounds, "background image (repeatable)");
  synth_cmd->add_option("--count", synth_args.count, "number of samples");
  synth_cmd->add_option("--p-occlude", synth_args.p_occlude, "occlusion probability");
  synth_cmd->add_option("--p-background", synth_args.p_background, "background probability");
  synth_cmd->add_option("--max-attempts", synth_args.max_attempts,
                        "paste redraws before giving up");
  synth_cmd->add_option("--seed", synth_args.seed, "random seed");

  ProjectCli project_args;
  CLI::App* project_cmd = app.add_subcommand("project", "project a cloud to 2D");
  project_cmd->add_option("input", project_args.input_path, "input cloud (.xyz/.ply)")->required();
  project_cmd->add_option("--view", project_args.view_name,
                          "ortho-xy, ortho-yz, ortho-xz, or camera");
  project_cmd->add_option("--camera", project_args.camera_path, "camera for --view camera");
  project_cmd->add_option("--out", project_args.out_path, "output file (default: stdout)");

  MetricsCli metrics_args;
  CLI::App* metrics_cmd = app.add_subcommand("metrics", "compute a metric between two files");
  metrics_cmd
      ->add_option("metric", metrics_args.metric,
                   "chamfer, chamfer-linear, emd, emd-exact, or iou")
      ->required();
  metrics_cmd->add_option("a", metrics_args.path_a, "first file")->required();
  metrics_cmd->add_option("b", metrics_args.path_b, "second file")->required();
  metrics_cmd->add_option("--epsilon", metrics_args.epsilon, "emd approximation tolerance");
  metrics_cmd->add_option("--cap", metrics_args.cap, "emd-exact size limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return run_fit(fit_args, fit_cmd);
    if (app.got_subcommand(refine_cmd)) return run_refine(refine_args, refine_cmd);
    if (app.got_subcommand(eval_cmd)) return run_eval(eval_args, eval_cmd);
    if (app.got_subcommand(synth_cmd)) return run_synth_occ(synth_args, synth_cmd);
    if (app.got_subcommand(project_cmd)) return run_project(project_args);
    if (app.got_subcommand(metrics_cmd)) return run_metrics(metrics_args);
  } catch (const pcrk::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
