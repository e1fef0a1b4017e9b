// End-to-end tests of the command-line binary, driven as a subprocess.  The
// binary's path arrives through the ARC_BIN environment variable, set by the
// test registration.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "arc/client.hpp"
#include "arc/image.hpp"
#include "arc/marker.hpp"
#include "arc/server.hpp"
#include "arc/shape_mlp.hpp"
#include "support/synth.hpp"

namespace fs = std::filesystem;
using namespace arc;

namespace {

std::string arc_bin() {
  const char* bin = std::getenv("ARC_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

struct RunResult {
  int code = -1;
  std::string out;
};

/// Runs `prefix arc args` through the shell, capturing stdout; stderr is
/// discarded unless merge_stderr is set.
RunResult run_cli(const std::string& args, const std::string& env_prefix = "",
                  bool merge_stderr = false) {
  const std::string cmd =
      env_prefix + arc_bin() + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// Scratch directory removed at scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "arc_cli_XXXXXX").string();
    REQUIRE(mkdtemp(tmpl.data()) != nullptr);
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_shape_masks(const fs::path& class_dir, synth::Shape kind, int count,
                       uint64_t seed) {
  fs::create_directories(class_dir);
  SplitMix64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const double size = 18.0 + rng.uniform(0.0, 24.0);
    const GrayImage img = synth::draw_shape(kind, size, rng.uniform(0.0, 6.28));
    pgm_save((class_dir / ("s" + std::to_string(i) + ".pgm")).string(), img);
  }
}

}  // namespace

TEST_CASE("help requests exit cleanly with a synopsis") {
  const RunResult r = run_cli("--help", "", true);
  CHECK(r.code == 0);
  CHECK(r.out.find("marker-gen") != std::string::npos);
  CHECK(r.out.find("detect") != std::string::npos);
}

TEST_CASE("marker generation and detection round-trip to a golden row") {
  TempDir tmp;
  const RunResult gen = run_cli("marker-gen --id 321 --out " + tmp.file("m.pgm"));
  CHECK(gen.code == 0);
  CHECK(gen.out.empty());
  CHECK(fs::exists(tmp.file("m.pgm")));

  const RunResult det = run_cli("detect " + tmp.file("m.pgm"));
  CHECK(det.code == 0);
  CHECK(det.out ==
        "321\t0\t0\t8.00\t8.00\t63.00\t8.00\t63.00\t63.00\t8.00\t63.00\n");

  // Byte-stable across runs.
  CHECK(run_cli("detect " + tmp.file("m.pgm")).out == det.out);
}

TEST_CASE("detect exits 3 and prints nothing when no markers are present") {
  TempDir tmp;
  pgm_save(tmp.file("blank.pgm"), synth::white_canvas(64, 64));
  const RunResult r = run_cli("detect " + tmp.file("blank.pgm"));
  CHECK(r.code == 3);
  CHECK(r.out.empty());
}

TEST_CASE("usage problems exit 1") {
  TempDir tmp;
  pgm_save(tmp.file("img.pgm"), synth::white_canvas(16, 16));
  CHECK(run_cli("").code == 1);                                     // No subcommand.
  CHECK(run_cli("no-such-command").code == 1);                      // Unknown subcommand.
  CHECK(run_cli("marker-gen --id 5000 --out " + tmp.file("x.pgm")).code == 1);  // Id range.
  CHECK(run_cli("detect " + tmp.file("img.pgm") + " --format json").code == 1);
  CHECK(run_cli("classify " + tmp.file("img.pgm")).code == 1);      // Needs model or remote.
  CHECK(run_cli("bench " + tmp.file("img.pgm") + " --iters 0").code == 1);
}

TEST_CASE("missing inputs exit 2") {
  TempDir tmp;
  pgm_save(tmp.file("img.pgm"), synth::white_canvas(16, 16));
  CHECK(run_cli("detect " + tmp.file("absent.pgm")).code == 2);
  CHECK(run_cli("train " + tmp.file("absent_dir") + " " + tmp.file("model.txt")).code == 2);
  CHECK(run_cli("classify " + tmp.file("img.pgm") + " --model " + tmp.file("absent.txt")).code ==
        2);
  CHECK(run_cli("match " + tmp.file("absent_dir") + " " + tmp.file("img.pgm")).code == 2);
}

TEST_CASE("train produces a model that classify applies end to end") {
  TempDir tmp;
  write_shape_masks(tmp.path / "data" / "disc", synth::Shape::Disc, 12, 101);
  write_shape_masks(tmp.path / "data" / "square", synth::Shape::Square, 12, 202);

  const RunResult train =
      run_cli("train " + tmp.file("data") + " " + tmp.file("model.txt") +
              " --hidden 8 --epochs 200 --rays 24 --seed 5");
  CHECK(train.code == 0);
  CHECK(fs::exists(tmp.file("model.txt")));
  // Stdout carries the final epoch mean loss as a single number.
  char* end = nullptr;
  const double loss = std::strtod(train.out.c_str(), &end);
  CHECK(end != train.out.c_str());
  CHECK(loss >= 0.0);
  CHECK(loss < 0.5);  // Two easily separable classes must converge.

  GrayImage disc_scene = synth::white_canvas(120, 100);
  synth::paste(disc_scene, synth::draw_shape(synth::Shape::Disc, 40.0), 30, 20);
  pgm_save(tmp.file("disc.pgm"), disc_scene);
  const RunResult disc = run_cli("classify " + tmp.file("disc.pgm") + " --model " +
                                 tmp.file("model.txt"));
  CHECK(disc.code == 0);
  CHECK(disc.out.substr(0, 5) == "disc\t");

  GrayImage square_scene = synth::white_canvas(120, 100);
  synth::paste(square_scene, synth::draw_shape(synth::Shape::Square, 40.0, 0.4), 30, 20);
  pgm_save(tmp.file("square.pgm"), square_scene);
  const RunResult square = run_cli("classify " + tmp.file("square.pgm") + " --model " +
                                   tmp.file("model.txt"));
  CHECK(square.code == 0);
  CHECK(square.out.substr(0, 7) == "square\t");

  // Confidence is printed with four decimals.
  const size_t tab = square.out.find('\t');
  REQUIRE(tab != std::string::npos);
  const std::string conf = square.out.substr(tab + 1);
  CHECK(conf.size() == 7);  // "0.xxxx\n"
  CHECK(conf.find('.') == 1);

  // An empty scene classifies nothing.
  pgm_save(tmp.file("blank.pgm"), synth::white_canvas(64, 64));
  CHECK(run_cli("classify " + tmp.file("blank.pgm") + " --model " + tmp.file("model.txt"))
            .code == 3);

  // A server holding the same model answers classify identically, even though
  // its detection config is left at defaults (different binarization and ray
  // count than the model needs).
  arc::net::ServerConfig scfg;
  scfg.model = model_load_file(tmp.file("model.txt"));
  arc::net::Server server(scfg, 0);
  server.start();
  const std::string endpoint = "127.0.0.1:" + std::to_string(server.port());
  const RunResult remote_disc =
      run_cli("classify " + tmp.file("disc.pgm") + " --remote " + endpoint);
  CHECK(remote_disc.code == 0);
  CHECK(remote_disc.out == disc.out);
  const RunResult remote_square =
      run_cli("classify " + tmp.file("square.pgm") + " --remote " + endpoint);
  CHECK(remote_square.code == 0);
  CHECK(remote_square.out == square.out);
  CHECK(run_cli("classify " + tmp.file("blank.pgm") + " --remote " + endpoint).code == 3);
}

TEST_CASE("remote detection prints the same TSV as the local run") {
  TempDir tmp;
  GrayImage scene = synth::white_canvas(240, 180);
  synth::paste(scene, render_marker(7, 6), 20, 16);
  synth::paste(scene, render_marker(1000, 6), 140, 90);
  pgm_save(tmp.file("scene.pgm"), scene);

  arc::net::Server server({}, 0);
  server.start();
  const std::string endpoint = "127.0.0.1:" + std::to_string(server.port());

  const RunResult local = run_cli("detect " + tmp.file("scene.pgm"));
  const RunResult remote = run_cli("detect " + tmp.file("scene.pgm") + " --remote " + endpoint);
  CHECK(local.code == 0);
  CHECK(remote.code == 0);
  CHECK(local.out == remote.out);
  CHECK(local.out.find("7\t") == 0);

  // ARC_PORT supplies the port when the endpoint omits it.
  const RunResult env_remote =
      run_cli("detect " + tmp.file("scene.pgm") + " --remote 127.0.0.1",
              "ARC_PORT=" + std::to_string(server.port()) + " ");
  CHECK(env_remote.code == 0);
  CHECK(env_remote.out == local.out);

  // A bad ARC_PORT value is a usage error.
  CHECK(run_cli("detect " + tmp.file("scene.pgm") + " --remote 127.0.0.1",
                "ARC_PORT=bogus ")
            .code == 1);

  // Unreachable endpoints are transport failures.
  CHECK(run_cli("detect " + tmp.file("scene.pgm") + " --remote 127.0.0.1:1").code == 4);
}

TEST_CASE("bench prints one TSV block per mode") {
  TempDir tmp;
  GrayImage scene = synth::white_canvas(200, 150);
  synth::paste(scene, render_marker(777, 5), 30, 25);
  pgm_save(tmp.file("scene.pgm"), scene);

  const RunResult local = run_cli("bench " + tmp.file("scene.pgm") + " --iters 3");
  CHECK(local.code == 0);
  CHECK(local.out.find("mode\titers\tmean_ms\tp50_ms\tp95_ms\tmin_ms\tmax_ms\n") == 0);
  CHECK(local.out.find("\nlocal\t3\t") != std::string::npos);
  CHECK(local.out.find("remote") == std::string::npos);

  arc::net::Server server({}, 0);
  server.start();
  const RunResult both = run_cli("bench " + tmp.file("scene.pgm") + " --iters 3 --remote 127.0.0.1:" +
                                 std::to_string(server.port()));
  CHECK(both.code == 0);
  CHECK(both.out.find("\nlocal\t3\t") != std::string::npos);
  CHECK(both.out.find("\nremote\t3\t") != std::string::npos);

  CHECK(run_cli("bench " + tmp.file("scene.pgm") + " --remote 127.0.0.1:1").code == 4);
}

TEST_CASE("match reports template hits for detected quads") {
  TempDir tmp;
  // Template library: canonical 56x56 patches cropped from rendered markers.
  fs::create_directories(tmp.path / "tmpl");
  for (const uint16_t id : {7, 1000}) {
    const GrayImage full = render_marker(id, 8);  // 72x72 with quiet zone.
    GrayImage patch(56, 56);
    for (uint32_t y = 0; y < 56; ++y)
      for (uint32_t x = 0; x < 56; ++x) patch.at(x, y) = full.at(x + 8, y + 8);
    pgm_save((tmp.path / "tmpl" / ("m" + std::to_string(id) + ".pgm")).string(), patch);
  }

  GrayImage scene = synth::white_canvas(160, 120);
  synth::paste(scene, render_marker(7, 8), 30, 20);
  pgm_save(tmp.file("scene.pgm"), scene);

  const RunResult hit = run_cli("match " + tmp.file("tmpl") + " " + tmp.file("scene.pgm"));
  CHECK(hit.code == 0);
  CHECK(hit.out.substr(0, 3) == "m7\t");
  // Score column: a clean render matches near-perfectly.
  const double score = std::strtod(hit.out.c_str() + 3, nullptr);
  CHECK(score > 0.9);

  pgm_save(tmp.file("blank.pgm"), synth::white_canvas(64, 64));
  CHECK(run_cli("match " + tmp.file("tmpl") + " " + tmp.file("blank.pgm")).code == 3);
}

TEST_CASE("serve announces its port and shuts down cleanly on SIGTERM") {
  int fds[2];
  REQUIRE(pipe(fds) == 0);
  const pid_t pid = fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    // Child: route stderr into the pipe and exec the server on an ephemeral
    // port.
    dup2(fds[1], 2);
    close(fds[0]);
    close(fds[1]);
    const std::string bin = arc_bin();
    execl(bin.c_str(), bin.c_str(), "serve", "--port", "0", nullptr);
    _exit(127);
  }
  close(fds[1]);

  // The first stderr line announces the bound port.
  pollfd pfd{fds[0], POLLIN, 0};
  REQUIRE(poll(&pfd, 1, 5000) == 1);
  char line[128] = {};
  const ssize_t n = read(fds[0], line, sizeof line - 1);
  REQUIRE(n > 0);
  unsigned port = 0;
  REQUIRE(sscanf(line, "listening on port %u", &port) == 1);
  REQUIRE(port > 0);

  // The advertised port answers requests.
  {
    arc::net::Client client("127.0.0.1", static_cast<uint16_t>(port));
    CHECK_NOTHROW(arc::net::ping(client));
  }

  kill(pid, SIGTERM);
  int status = 0;
  REQUIRE(waitpid(pid, &status, 0) == pid);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
  close(fds[0]);
}
