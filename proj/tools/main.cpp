#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tofskin/errors.hpp"
#include "tofskin/kinematics.hpp"
#include "tofskin/manifest.hpp"
#include "tofskin/mesh.hpp"
#include "tofskin/placement.hpp"
#include "tofskin/pointcloud.hpp"
#include "tofskin/scene.hpp"
#include "tofskin/sdf.hpp"
#include "tofskin/shell.hpp"
#include "tofskin/telemetry.hpp"
#include "tofskin/version.hpp"

namespace {

using namespace tofskin;
using Json = nlohmann::ordered_json;

// exit codes per error class (0 = success, CLI11 handles usage errors)
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;
constexpr int kExitValidation = 4;
constexpr int kExitNetwork = 5;
constexpr int kExitInternal = 70;

std::string g_invocation;

Json repro_meta(std::optional<std::uint64_t> seed = std::nullopt) {
  Json j;
  j["tool"] = std::string(kToolName) + " " + kVersion;
  j["invocation"] = g_invocation;
  if (seed) j["seed"] = *seed;
  return j;
}

void write_sidecar(const std::filesystem::path& target, const Json& meta) {
  std::filesystem::path p = target;
  p += ".meta.json";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write sidecar: " + p.string());
  out << meta.dump(2) << "\n";
}

std::vector<std::string> repro_comments(std::optional<std::uint64_t> seed = std::nullopt) {
  std::vector<std::string> c = {"invocation=" + g_invocation};
  if (seed) c.push_back("seed=" + std::to_string(*seed));
  return c;
}

std::vector<int> load_region_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open region file: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid region JSON: " + std::string(e.what()));
  }
  if (!j.is_array()) throw FormatError("region file must be a JSON array of face indices");
  std::vector<int> region;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw FormatError("region entries must be integers");
    region.push_back(e.get<int>());
  }
  return region;
}

void save_mesh_by_extension(const TriMesh& mesh, const std::filesystem::path& path,
                            std::optional<std::uint64_t> seed) {
  auto ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(ch));
  if (ext == ".stl") {
    save_stl(mesh, path, seed ? "seed=" + std::to_string(*seed) : "");
    write_sidecar(path, repro_meta(seed));
  } else if (ext == ".ply") {
    save_ply(mesh, path, repro_comments(seed));
  } else {
    throw ValidationError("mesh output must end in .stl or .ply: " + path.string());
  }
}

int run_generate(const std::string& mesh_path, const std::string& region_path,
                 const std::string& link_name, double min_sep, double gap, double thickness,
                 std::vector<double> pcb, double pcb_clearance, double voxel,
                 std::uint64_t seed, int max_attempts, double fov, bool no_pockets,
                 const std::string& out_mesh, const std::string& out_manifest) {
  LoadReport load_report;
  const TriMesh mesh = load_mesh(mesh_path, &load_report);
  if (load_report.degenerate_dropped)
    std::cerr << "note: dropped " << load_report.degenerate_dropped
              << " degenerate triangles\n";

  std::vector<int> region;
  if (!region_path.empty()) {
    region = load_region_file(region_path);
  } else {
    region.resize(mesh.triangles.size());
    std::iota(region.begin(), region.end(), 0);
  }

  PlacementConfig cfg{min_sep, seed, max_attempts};
  const auto samples = sample_poisson(mesh, region, cfg);
  std::cout << "sensors placed: " << samples.size() << "\n";

  SkinParams params;
  params.gap = gap;
  params.thickness = thickness;
  params.region = region;
  auto shell = offset_shell(mesh, params);
  if (!shell.self_intersections.empty()) {
    std::cerr << "warning: offset shell self-intersects in "
              << shell.self_intersections.size() << " face pair(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(8, shell.self_intersections.size()); ++i)
      std::cerr << " (" << shell.self_intersections[i].first << ","
                << shell.self_intersections[i].second << ")";
    std::cerr << "\n";
  }
  const double shell_volume = signed_volume(shell.mesh);
  std::cout << "shell volume: " << shell_volume * 1e6 << " cm^3, "
            << (is_watertight(shell.mesh) ? "watertight" : "NOT watertight") << "\n";

  const FrustumModel frustum{fov, 8, 8, 0.0, 4.0};
  const PcbFootprint footprint{pcb[0], pcb[1], pcb[2], pcb_clearance};
  SensorManifest manifest = build_manifest(samples, footprint, frustum, link_name, params);
  manifest.meta = repro_meta(seed);

  TriMesh printable = shell.mesh;
  if (!no_pockets && !manifest.sensors.empty()) {
    std::vector<OrientedBox> cutters;
    for (const auto& rec : manifest.sensors) cutters.push_back(pcb_cutter(footprint, rec.mount));
    SdfGrid grid = voxelize_sdf(shell.mesh, voxel);
    CsgReport csg;
    grid = csg_subtract(std::move(grid), cutters, &csg);
    for (std::size_t idx : csg.skipped_outside)
      std::cerr << "warning: cutter " << idx << " lies outside the voxel grid; skipped\n";
    printable = extract_surface(grid);
    std::cout << "printable volume: " << solid_volume(grid) * 1e6 << " cm^3 at voxel "
              << voxel * 1e3 << " mm\n";
  }

  save_mesh_by_extension(printable, out_mesh, seed);
  save_manifest(manifest, out_manifest);
  std::cout << "wrote " << out_mesh << " and " << out_manifest << "\n";
  return 0;
}

int run_simulate(const std::string& manifest_path, const std::string& chain_path,
                 const std::string& joints_path, const std::string& scene_path, int frames,
                 double rate, double sigma, std::uint64_t seed, double min_range,
                 double max_range, const std::string& out_path, const std::string& udp) {
  const SensorManifest manifest = load_manifest(manifest_path);
  const KinematicChain chain = load_chain(chain_path);
  const JointState joints = load_joints(joints_path);
  const Scene scene = load_scene(scene_path);

  const NoiseModel noise{sigma, seed};
  const auto captured =
      simulate_capture(scene, manifest, chain, joints, frames, rate, noise, min_range, max_range);
  std::cout << "simulated " << captured.size() << " frames from " << manifest.sensors.size()
            << " sensors\n";

  if (!out_path.empty()) {
    write_frame_file(out_path, captured);
    write_sidecar(out_path, repro_meta(seed));
    std::cout << "wrote " << out_path << " (" << captured.size() * kFrameWireSize
              << " bytes)\n";
  }
  if (!udp.empty()) {
    const SendReport report = emit_frames(captured, udp, rate);
    std::cout << "udp: attempted " << report.attempted << ", sent " << report.sent
              << ", failed " << report.failed << "\n";
    if (report.sent == 0 && report.attempted > 0)
      throw NetworkError("no datagrams could be sent to " + udp);
  }
  return 0;
}

int run_collect(const std::string& listen, std::size_t frame_budget, double duration,
                const std::string& out_path, const std::string& stats_path) {
  FrameCollector collector(listen);
  std::cerr << "listening on port " << collector.port() << "\n";

  std::vector<ToFFrame> frames;
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::milliseconds(static_cast<std::int64_t>(duration * 1000.0));
  while (std::chrono::steady_clock::now() < deadline) {
    if (frame_budget > 0 && frames.size() >= frame_budget) break;
    auto frame = collector.pop(std::chrono::milliseconds(100));
    if (frame) frames.push_back(*frame);
  }
  collector.stop();
  const SessionStats stats = collector.stats();

  write_frame_file(out_path, frames);
  write_sidecar(out_path, repro_meta());

  Json sj;
  sj["meta"] = repro_meta();
  sj["frames_received"] = stats.frames_received();
  sj["decode_errors"] = {{"short_datagram", stats.short_datagrams},
                         {"bad_magic", stats.bad_magic},
                         {"bad_version", stats.bad_version}};
  sj["per_sensor"] = Json::array();
  for (const auto& [idx, s] : stats.sensors)
    sj["per_sensor"].push_back({{"sensor", idx},
                                {"received", s.received},
                                {"min_sequence", s.min_sequence},
                                {"max_sequence", s.max_sequence},
                                {"gaps", s.gaps()}});
  if (stats_path.empty()) {
    std::cout << sj.dump(2) << "\n";
  } else {
    std::ofstream out(stats_path, std::ios::binary);
    if (!out) throw IoError("cannot write stats file: " + stats_path);
    out << sj.dump(2) << "\n";
  }
  std::cout << "collected " << frames.size() << " frames -> " << out_path << "\n";
  return 0;
}

int run_reconstruct(const std::string& frames_path, const std::string& manifest_path,
                    const std::string& chain_path, const std::string& joints_path,
                    double min_range, double max_range, bool binary,
                    const std::string& out_path) {
  SessionStats file_stats;
  const auto frames = read_frame_file(frames_path, &file_stats);
  if (file_stats.decode_errors() > 0)
    std::cerr << "warning: " << file_stats.decode_errors()
              << " malformed records skipped in " << frames_path << "\n";
  const SensorManifest manifest = load_manifest(manifest_path);
  const KinematicChain chain = load_chain(chain_path);
  const JointState joints = load_joints(joints_path);

  const PointCloud cloud =
      assemble(frames, manifest, chain, joints, AssembleOptions{min_range, max_range});
  if (cloud.frames_dropped_unknown_sensor)
    std::cerr << "warning: dropped " << cloud.frames_dropped_unknown_sensor
              << " frames with sensor indices missing from the manifest\n";
  if (cloud.points.empty())
    std::cerr << "warning: no valid zones; writing an empty cloud\n";

  write_ply(cloud, out_path, repro_comments(), binary);
  std::cout << "wrote " << cloud.points.size() << " points ("
            << cloud.zones_valid() << "/" << cloud.zones_total() << " zones valid) -> "
            << out_path << "\n";
  return 0;
}

int run_eval(const std::string& cloud_path, const std::string& scene_path,
             const std::string& out_path) {
  const PointCloud cloud = read_ply_cloud(cloud_path);
  const Scene scene = load_scene(scene_path);
  const EvalReport report = evaluate(cloud, scene);

  Json j;
  j["meta"] = repro_meta();
  const Json body = to_json(report);
  for (const auto& [k, v] : body.items()) j[k] = v;
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + out_path);
    out << j.dump(2) << "\n";
    std::cout << "wrote " << out_path << " (rmse " << report.global.rmse_m * 1e3 << " mm, max "
              << report.global.max_m * 1e3 << " mm over " << report.global.points
              << " points)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    if (i) g_invocation += ' ';
    g_invocation += argv[i];
  }

  CLI::App app{"procedural ToF skin toolkit: generate sensor shells, simulate or stream "
               "frames, reconstruct and score point clouds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

  int rc = 0;

  // generate
  auto* gen = app.add_subcommand("generate", "build a skin shell and sensor manifest from a link mesh");
  std::string g_mesh, g_region, g_link = "link", g_out_mesh, g_out_manifest;
  double g_min_sep = 0.045, g_gap = 0.0, g_thickness = 0.005, g_clearance = 0.0005;
  double g_voxel = 0.001, g_fov = 65.0;
  std::vector<double> g_pcb = {0.0205, 0.0205, 0.004};
  std::uint64_t g_seed = 0;
  int g_attempts = 10000;
  bool g_no_pockets = false;
  gen->add_option("--mesh", g_mesh, "input link mesh (.obj or binary .stl)")->required();
  gen->add_option("--region", g_region, "JSON array of face indices to cover (default: all)");
  gen->add_option("--link-name", g_link, "link name recorded in the manifest");
  gen->add_option("--min-sep", g_min_sep, "minimum sensor separation in meters")
      ->check(CLI::PositiveNumber);
  gen->add_option("--gap", g_gap, "clearance between link and shell inner wall, meters")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--thickness", g_thickness, "shell wall thickness, meters")
      ->check(CLI::PositiveNumber);
  gen->add_option("--pcb", g_pcb, "PCB width height depth in meters")->expected(3);
  gen->add_option("--pcb-clearance", g_clearance, "clearance added per pocket side, meters")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--voxel", g_voxel, "voxel size for pocket subtraction, meters")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "placement seed");
  gen->add_option("--max-attempts", g_attempts, "consecutive rejected darts before stopping")
      ->check(CLI::PositiveNumber);
  gen->add_option("--fov", g_fov, "diagonal field of view recorded per sensor, degrees");
  gen->add_flag("--no-pockets", g_no_pockets, "skip PCB pocket subtraction");
  gen->add_option("--out-mesh", g_out_mesh, "output shell mesh (.stl mm or .ply m)")->required();
  gen->add_option("--out-manifest", g_out_manifest, "output sensor manifest JSON")->required();
  gen->callback([&] {
    rc = run_generate(g_mesh, g_region, g_link, g_min_sep, g_gap, g_thickness, g_pcb,
                      g_clearance, g_voxel, g_seed, g_attempts, g_fov, g_no_pockets,
                      g_out_mesh, g_out_manifest);
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "ray-cast a scene into ToF frames (file and/or UDP)");
  std::string s_manifest, s_chain, s_joints, s_scene, s_out, s_udp;
  int s_frames = 10;
  double s_rate = 15.0, s_sigma = 0.0, s_min_range = 0.0, s_max_range = 4.0;
  std::uint64_t s_seed = 0;
  sim->add_option("--manifest", s_manifest, "sensor manifest JSON")->required();
  sim->add_option("--chain", s_chain, "kinematic chain JSON")->required();
  sim->add_option("--joints", s_joints, "joint state JSON")->required();
  sim->add_option("--scene", s_scene, "scene JSON")->required();
  sim->add_option("--frames", s_frames, "frames per sensor")->check(CLI::NonNegativeNumber);
  sim->add_option("--rate", s_rate, "frame rate per sensor, Hz")->check(CLI::PositiveNumber);
  sim->add_option("--sigma", s_sigma, "range noise sigma, millimeters")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", s_seed, "noise seed");
  sim->add_option("--min-range", s_min_range, "minimum range, meters");
  sim->add_option("--max-range", s_max_range, "maximum range, meters");
  sim->add_option("--out", s_out, "output frame file");
  sim->add_option("--udp", s_udp, "destination host:port for live emission");
  sim->callback([&] {
    if (s_out.empty() && s_udp.empty())
      throw CLI::ValidationError("simulate", "need --out and/or --udp");
    rc = run_simulate(s_manifest, s_chain, s_joints, s_scene, s_frames, s_rate, s_sigma,
                      s_seed, s_min_range, s_max_range, s_out, s_udp);
  });

  // collect
  auto* col = app.add_subcommand("collect", "receive frames over UDP into a frame file");
  std::string c_listen = "127.0.0.1:9000", c_out, c_stats;
  std::size_t c_frames = 0;
  double c_duration = 5.0;
  col->add_option("--listen", c_listen, "bind address host:port");
  col->add_option("--frames", c_frames, "stop after this many frames (0 = duration only)");
  col->add_option("--duration", c_duration, "listen duration, seconds")
      ->check(CLI::PositiveNumber);
  col->add_option("--out", c_out, "output frame file")->required();
  col->add_option("--stats", c_stats, "session stats JSON (default: stdout)");
  col->callback([&] { rc = run_collect(c_listen, c_frames, c_duration, c_out, c_stats); });

  // reconstruct
  auto* rec = app.add_subcommand(
      "reconstruct", "project a frame file through manifest + kinematics into a PLY cloud");
  std::string r_frames, r_manifest, r_chain, r_joints, r_out;
  double r_min_range = 0.0, r_max_range = 4.0;
  bool r_binary = false;
  rec->add_option("--frames", r_frames, "input frame file")->required();
  rec->add_option("--manifest", r_manifest, "sensor manifest JSON")->required();
  rec->add_option("--chain", r_chain, "kinematic chain JSON")->required();
  rec->add_option("--joints", r_joints, "joint state JSON")->required();
  rec->add_option("--min-range", r_min_range, "minimum accepted range, meters");
  rec->add_option("--max-range", r_max_range, "maximum accepted range, meters");
  rec->add_flag("--binary", r_binary, "write binary little-endian PLY");
  rec->add_option("--out", r_out, "output PLY path")->required();
  rec->callback([&] {
    rc = run_reconstruct(r_frames, r_manifest, r_chain, r_joints, r_min_range, r_max_range,
                         r_binary, r_out);
  });

  // eval
  auto* ev = app.add_subcommand("eval", "score a PLY cloud against a scene");
  std::string e_cloud, e_scene, e_out;
  ev->add_option("--cloud", e_cloud, "input PLY cloud")->required();
  ev->add_option("--scene", e_scene, "scene JSON")->required();
  ev->add_option("--out", e_out, "report JSON (default: stdout)");
  ev->callback([&] { rc = run_eval(e_cloud, e_scene, e_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const IoError& e) {
    std::cerr << kToolName << ": io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << kToolName << ": format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const ValidationError& e) {
    std::cerr << kToolName << ": validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NetworkError& e) {
    std::cerr << kToolName << ": network error: " << e.what() << "\n";
    return kExitNetwork;
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": error: " << e.what() << "\n";
    return kExitInternal;
  }
  return rc;
}
