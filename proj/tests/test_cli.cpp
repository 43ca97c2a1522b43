#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "fixtures.hpp"
#include "tofskin/pointcloud.hpp"
#include "tofskin/rng.hpp"
#include "tofskin/telemetry.hpp"

using Json = nlohmann::ordered_json;

namespace {

struct RunResult {
  int exit_code = -1;
  bool signaled = false;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(TOFSKIN_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.signaled = WIFSIGNALED(status);
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// PLY bytes with the reproducibility comments removed (they quote input paths)
std::string ply_payload(const std::filesystem::path& p) {
  std::istringstream in(fixtures::slurp(p));
  std::string out, line;
  while (std::getline(in, line))
    if (line.rfind("comment invocation=", 0) != 0) out += line + "\n";
  return out;
}

// tiny tube link plus chain/joints/scene inputs
struct Workspace {
  fixtures::TempDir dir;
  std::filesystem::path mesh, chain, joints, scene;

  Workspace() {
    mesh = dir.file("link.obj");
    fixtures::write_obj(mesh, fixtures::tube(0.03, 0.1, 48, 6));
    chain = dir.file("chain.json");
    fixtures::write_text(chain, R"({"links":[
      {"name":"base","rotation_rowmajor":[1,0,0,0,1,0,0,0,1],"translation_m":[0,0,0],"axis":[0,0,1],"type":"fixed"},
      {"name":"link5","rotation_rowmajor":[1,0,0,0,1,0,0,0,1],"translation_m":[0,0,0.05],"axis":[0,0,1],"type":"revolute"}]})");
    joints = dir.file("joints.json");
    fixtures::write_text(joints, R"({"angles_rad":[0.35]})");
    scene = dir.file("scene.json");
    fixtures::write_text(scene, R"({"primitives":[
      {"type":"sphere","center_m":[0.25,0.0,0.1],"radius_m":0.08},
      {"type":"box","rotation_rowmajor":[1,0,0,0,1,0,0,0,1],"translation_m":[0.0,0.3,0.1],"extents_m":[0.2,0.05,0.2]},
      {"type":"plane","point_m":[0,0,-0.4],"normal":[0,0,1]}]})");
  }

  std::string generate_args(const std::filesystem::path& out_mesh,
                            const std::filesystem::path& out_manifest,
                            const std::string& extra = "") const {
    return "generate --mesh " + q(mesh) + " --link-name link5 --min-sep 0.03 --gap 0.001" +
           " --thickness 0.004 --pcb 0.015 0.015 0.003 --voxel 0.002 --seed 7 " + extra +
           " --out-mesh " + q(out_mesh) + " --out-manifest " + q(out_manifest);
  }
};

}  // namespace

TEST_CASE("missing input mesh exits with the io code and writes nothing") {
  fixtures::TempDir dir;
  const auto r = run("generate --mesh " + q(dir.file("absent.obj")) + " --out-mesh " +
                     q(dir.file("shell.stl")) + " --out-manifest " + q(dir.file("m.json")));
  CHECK(r.exit_code == 2);
  CHECK_FALSE(std::filesystem::exists(dir.file("shell.stl")));
  CHECK_FALSE(std::filesystem::exists(dir.file("m.json")));
}

TEST_CASE("generate produces a shell, manifest, and sidecar metadata") {
  Workspace ws;
  const auto shell = ws.dir.file("shell.stl");
  const auto manifest = ws.dir.file("manifest.json");
  const auto r = run(ws.generate_args(shell, manifest));
  CHECK(r.exit_code == 0);
  REQUIRE(std::filesystem::exists(shell));
  REQUIRE(std::filesystem::exists(manifest));
  CHECK(std::filesystem::exists(ws.dir.file("shell.stl.meta.json")));

  const Json m = Json::parse(fixtures::slurp(manifest));
  CHECK(m["version"] == 1);
  CHECK(m["link_name"] == "link5");
  CHECK(m["sensors"].size() >= 4);
  CHECK(m["meta"]["seed"] == 7);
  CHECK(m["meta"]["invocation"].get<std::string>().find("generate") != std::string::npos);
}

TEST_CASE("generate is deterministic for a fixed seed") {
  Workspace ws;
  REQUIRE(run(ws.generate_args(ws.dir.file("a.stl"), ws.dir.file("a.json"))).exit_code == 0);
  REQUIRE(run(ws.generate_args(ws.dir.file("b.stl"), ws.dir.file("b.json"))).exit_code == 0);
  // outputs named differently -> normalize the invocation line before compare
  Json a = Json::parse(fixtures::slurp(ws.dir.file("a.json")));
  Json b = Json::parse(fixtures::slurp(ws.dir.file("b.json")));
  a["meta"].erase("invocation");
  b["meta"].erase("invocation");
  CHECK(a == b);
  CHECK(fixtures::slurp(ws.dir.file("a.stl")) == fixtures::slurp(ws.dir.file("b.stl")));
}

TEST_CASE("disconnected coverage regions are a validation error") {
  Workspace ws;
  fixtures::write_text(ws.dir.file("region.json"), "[0, 200]");
  const auto r = run(ws.generate_args(ws.dir.file("s.stl"), ws.dir.file("m.json"),
                                      "--region " + q(ws.dir.file("region.json"))));
  CHECK(r.exit_code == 4);
}

TEST_CASE("simulate writes sensors x frames fixed-size records, deterministically") {
  Workspace ws;
  const auto manifest = ws.dir.file("manifest.json");
  REQUIRE(run(ws.generate_args(ws.dir.file("shell.ply"), manifest, "--no-pockets")).exit_code ==
          0);
  const std::size_t sensors = Json::parse(fixtures::slurp(manifest))["sensors"].size();

  const std::string sim = "simulate --manifest " + q(manifest) + " --chain " + q(ws.chain) +
                          " --joints " + q(ws.joints) + " --scene " + q(ws.scene) +
                          " --frames 3 --rate 15 --sigma 2.5 --seed 21 --out ";
  REQUIRE(run(sim + q(ws.dir.file("f1.bin"))).exit_code == 0);
  REQUIRE(run(sim + q(ws.dir.file("f2.bin"))).exit_code == 0);
  CHECK(std::filesystem::file_size(ws.dir.file("f1.bin")) ==
        sensors * 3 * tofskin::kFrameWireSize);
  CHECK(fixtures::slurp(ws.dir.file("f1.bin")) == fixtures::slurp(ws.dir.file("f2.bin")));
  CHECK(std::filesystem::exists(ws.dir.file("f1.bin.meta.json")));
}

TEST_CASE("reconstructing an all-sentinel capture warns but succeeds") {
  Workspace ws;
  const auto manifest = ws.dir.file("manifest.json");
  REQUIRE(run(ws.generate_args(ws.dir.file("shell.ply"), manifest, "--no-pockets")).exit_code ==
          0);
  fixtures::write_text(ws.dir.file("empty_scene.json"), R"({"primitives":[]})");
  REQUIRE(run("simulate --manifest " + q(manifest) + " --chain " + q(ws.chain) + " --joints " +
              q(ws.joints) + " --scene " + q(ws.dir.file("empty_scene.json")) +
              " --frames 2 --out " + q(ws.dir.file("f.bin")))
              .exit_code == 0);
  const auto r = run("reconstruct --frames " + q(ws.dir.file("f.bin")) + " --manifest " +
                     q(manifest) + " --chain " + q(ws.chain) + " --joints " + q(ws.joints) +
                     " --out " + q(ws.dir.file("cloud.ply")));
  CHECK(r.exit_code == 0);
  const auto cloud = tofskin::read_ply_cloud(ws.dir.file("cloud.ply"));
  CHECK(cloud.points.empty());
}

TEST_CASE("noise-free pipeline reconstructs the scene to sub-millimeter error") {
  Workspace ws;
  const auto manifest = ws.dir.file("manifest.json");
  REQUIRE(run(ws.generate_args(ws.dir.file("shell.ply"), manifest, "--no-pockets")).exit_code ==
          0);
  REQUIRE(run("simulate --manifest " + q(manifest) + " --chain " + q(ws.chain) + " --joints " +
              q(ws.joints) + " --scene " + q(ws.scene) + " --frames 4 --sigma 0 --out " +
              q(ws.dir.file("f.bin")))
              .exit_code == 0);
  REQUIRE(run("reconstruct --frames " + q(ws.dir.file("f.bin")) + " --manifest " + q(manifest) +
              " --chain " + q(ws.chain) + " --joints " + q(ws.joints) + " --out " +
              q(ws.dir.file("cloud.ply")))
              .exit_code == 0);
  REQUIRE(run("eval --cloud " + q(ws.dir.file("cloud.ply")) + " --scene " + q(ws.scene) +
              " --out " + q(ws.dir.file("report.json")))
              .exit_code == 0);

  const Json report = Json::parse(fixtures::slurp(ws.dir.file("report.json")));
  CHECK(report["global"]["points"].get<int>() > 200);
  CHECK(report["global"]["max_m"].get<double>() <= 0.6e-3);
  CHECK(report["global"]["valid_fraction"].get<double>() > 0.0);
  CHECK(report["meta"]["invocation"].get<std::string>().find("eval") != std::string::npos);
}

TEST_CASE("udp loopback path matches the file path frame for frame") {
  Workspace ws;
  const auto manifest = ws.dir.file("manifest.json");
  REQUIRE(run(ws.generate_args(ws.dir.file("shell.ply"), manifest, "--no-pockets")).exit_code ==
          0);
  const std::size_t sensors = Json::parse(fixtures::slurp(manifest))["sensors"].size();
  const std::string sim_base = "simulate --manifest " + q(manifest) + " --chain " +
                               q(ws.chain) + " --joints " + q(ws.joints) + " --scene " +
                               q(ws.scene) + " --frames 3 --rate 50 --sigma 1.5 --seed 5 ";

  REQUIRE(run(sim_base + "--out " + q(ws.dir.file("direct.bin"))).exit_code == 0);

  tofskin::FrameCollector collector("127.0.0.1:0");
  const std::string dest = "127.0.0.1:" + std::to_string(collector.port());
  REQUIRE(run(sim_base + "--udp " + dest).exit_code == 0);

  std::vector<tofskin::ToFFrame> received;
  while (received.size() < sensors * 3) {
    auto f = collector.pop(std::chrono::milliseconds(2000));
    if (!f) break;
    received.push_back(*f);
  }
  collector.stop();
  REQUIRE(received.size() == sensors * 3);
  CHECK(collector.stats().total_gaps() == 0);
  tofskin::write_frame_file(ws.dir.file("udp.bin"), received);

  for (const char* name : {"direct.bin", "udp.bin"}) {
    REQUIRE(run("reconstruct --frames " + q(ws.dir.file(name)) + " --manifest " + q(manifest) +
                " --chain " + q(ws.chain) + " --joints " + q(ws.joints) + " --out " +
                q(ws.dir.file(std::string(name) + ".ply")))
                .exit_code == 0);
  }
  CHECK(ply_payload(ws.dir.file("direct.bin.ply")) == ply_payload(ws.dir.file("udp.bin.ply")));
}

TEST_CASE("collect subcommand receives an emitted stream") {
  Workspace ws;
  const std::uint16_t port = 39000 + static_cast<std::uint16_t>(tofskin::Rng(42).uniform_u32(2000));
  const std::string listen = "127.0.0.1:" + std::to_string(port);

  std::thread rx([&] {
    run("collect --listen " + listen + " --frames 16 --duration 6 --out " +
        q(ws.dir.file("rx.bin")) + " --stats " + q(ws.dir.file("stats.json")));
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));

  std::vector<tofskin::ToFFrame> frames;
  for (std::uint32_t seq = 0; seq < 8; ++seq)
    for (int s = 0; s < 2; ++s) {
      tofskin::ToFFrame f;
      f.sensor_index = static_cast<std::uint8_t>(s);
      f.sequence = seq;
      f.ranges_mm.fill(1234);
      frames.push_back(f);
    }
  tofskin::emit_frames(frames, listen, 0.0);
  rx.join();

  REQUIRE(std::filesystem::exists(ws.dir.file("rx.bin")));
  const auto back = tofskin::read_frame_file(ws.dir.file("rx.bin"));
  CHECK(back.size() == 16);
  const Json stats = Json::parse(fixtures::slurp(ws.dir.file("stats.json")));
  CHECK(stats["frames_received"] == 16);
  CHECK(stats["per_sensor"].size() == 2);
  CHECK(stats["per_sensor"][0]["gaps"] == 0);
}

TEST_CASE("fuzz: corrupt input files never crash any reader") {
  Workspace ws;
  tofskin::Rng rng(4242);
  for (int trial = 0; trial < 12; ++trial) {
    std::string junk(1 + static_cast<std::size_t>(rng.uniform() * 400), '\0');
    for (auto& ch : junk) ch = static_cast<char>(rng.next_u64());
    const auto junk_json = ws.dir.file("junk.json");
    const auto junk_obj = ws.dir.file("junk.obj");
    const auto junk_stl = ws.dir.file("junk.stl");
    const auto junk_ply = ws.dir.file("junk.ply");
    const auto junk_bin = ws.dir.file("junk.bin");
    for (const auto& p : {junk_json, junk_obj, junk_stl, junk_ply, junk_bin})
      fixtures::write_text(p, junk);

    for (const std::string args : {
             "generate --mesh " + q(junk_obj) + " --out-mesh " + q(ws.dir.file("o.stl")) +
                 " --out-manifest " + q(ws.dir.file("o.json")),
             "generate --mesh " + q(junk_stl) + " --out-mesh " + q(ws.dir.file("o.stl")) +
                 " --out-manifest " + q(ws.dir.file("o.json")),
             "simulate --manifest " + q(junk_json) + " --chain " + q(ws.chain) + " --joints " +
                 q(ws.joints) + " --scene " + q(ws.scene) + " --out " + q(ws.dir.file("o.bin")),
             "reconstruct --frames " + q(junk_bin) + " --manifest " + q(junk_json) +
                 " --chain " + q(ws.chain) + " --joints " + q(ws.joints) + " --out " +
                 q(ws.dir.file("o.ply")),
             "eval --cloud " + q(junk_ply) + " --scene " + q(junk_json),
         }) {
      const auto r = run(args);
      CHECK_FALSE(r.signaled);
      CHECK(r.exit_code != 0);
      CHECK(r.exit_code < 71);
    }
  }
}

TEST_CASE("reconstruct exposes no calibration inputs") {
  const std::string cmd = std::string(TOFSKIN_BIN) + " reconstruct --help 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string help;
  char buf[256];
  while (fgets(buf, sizeof(buf), pipe)) help += buf;
  pclose(pipe);

  for (const char* required : {"--frames", "--manifest", "--chain", "--joints", "--out",
                               "--min-range", "--max-range", "--binary"})
    CHECK(help.find(required) != std::string::npos);
  for (const char* banned : {"calib", "fit", "align", "register", "icp"})
    CHECK(help.find(banned) == std::string::npos);
}
