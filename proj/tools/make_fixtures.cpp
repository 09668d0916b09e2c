// bakelabel_fixtures: writes a deterministic set of synthetic inputs for the
// bakelabel command-line tool (see README "Fixtures").

#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "bakelabel/bakelabel.hpp"
#include "bakelabel/synthetic.hpp"

namespace fs = std::filesystem;
using namespace bakelabel;

namespace {

DatasetStore image_manifest(std::vector<ImageRecord> images) {
  DatasetStore s;
  s.images = std::move(images);
  s.categories = bakery_taxonomy();
  return s;
}

void write_figure(const fs::path& dir) {
  const auto scene = synthetic::figure_scene();
  ImageRecord img{"tray", "tray.jpg", scene.dims, {}};
  img.meta.image_level_label = *bakery_taxonomy().find_by_name("Apfeltasche");
  save_dataset(image_manifest({img}), dir / "images.json");
  std::vector<DetectionRecord> recs;
  for (const auto& d : scene.detections) recs.push_back({img.id, d});
  const auto text = render_detection_stream(recs);
  write_text_file(dir / "detections.jsonl", text);

  // the same stream with line 7 truncated
  std::string broken;
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    auto l = text.substr(pos, end - pos);
    if (++line == 7) l = l.substr(0, l.size() / 2);
    broken += l + "\n";
    pos = end + 1;
  }
  write_text_file(dir / "malformed.jsonl", broken);
}

void write_weak(const fs::path& dir, std::mt19937_64& rng) {
  // 36 single-class images, two per class, 3 to 8 objects each
  std::vector<int> counts;
  for (int i = 0; i < 36; ++i) counts.push_back(3 + i % 6);
  const auto fx = synthetic::weak_fixture(rng, counts);
  save_dataset(image_manifest(fx.images), dir / "images.json");
  write_text_file(dir / "detections.jsonl", render_detection_stream(fx.detections));
  auto unlabeled = fx.images;
  unlabeled[5].meta.image_level_label.reset();
  save_dataset(image_manifest(unlabeled), dir / "images_missing_label.json");
}

void write_videos(const fs::path& dir, std::mt19937_64& rng) {
  // 167 videos of 29 or 30 frames (4,945 frames), 3 objects each
  std::string queries, candidates, truth;
  for (int v = 0; v < 167; ++v) {
    char id[16];
    std::snprintf(id, sizeof(id), "v%03d", v);
    const int frames = v < 65 ? 29 : 30;
    const auto mv = synthetic::motion_video(rng, id, 3, frames, 40.0, 1.0, 18);
    for (const auto& q : mv.queries) {
      auto j = detection_to_json({frame_image_id(id, 0), {q.box, q.score, q.label, "manual"}});
      j["video_id"] = q.video_id;
      j["origin"] = to_string(q.origin);
      queries += dump_line(j);
    }
    for (const auto& [f, boxes] : mv.candidates) {
      for (const auto& b : boxes) {
        candidates += dump_line(
            Json{{"video_id", id}, {"frame_index", f}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
      }
    }
    truth += render_track_stream(mv.truth);
  }
  write_text_file(dir / "queries.jsonl", queries);
  write_text_file(dir / "candidates.jsonl", candidates);
  write_text_file(dir / "truth.jsonl", truth);
  write_text_file(dir / "frame_size.txt", "600x120\n");
}

void write_angles(const fs::path& dir, std::mt19937_64& rng) {
  // 9 camera angles x 10 images x 3 objects; predictions drift beyond 40 degrees
  DatasetStore gt;
  gt.categories = bakery_taxonomy();
  std::vector<DetectionRecord> preds, partial;
  std::int64_t id = 1;
  for (int a = 0; a <= 80; a += 10) {
    for (int k = 0; k < 10; ++k) {
      ImageRecord img{"angle" + std::to_string(a) + "_" + std::to_string(k), "", ImageDims{640, 480}, {}};
      img.file_name = img.id + ".jpg";
      img.meta.camera_angle_deg = a;
      gt.images.push_back(img);
      for (int o = 0; o < 3; ++o) {
        const BoundingBox b{40.0 + 200.0 * o + synthetic::uniform(rng, 0, 20), 150.0 + synthetic::uniform(rng, 0, 20),
                            120, 120};
        const CategoryId label = 1 + (k + o) % 18;
        gt.annotations.push_back({id++, img.id, label, b, std::nullopt, Provenance::manual});
        const double shift = a > 40 ? (a - 40) / 10.0 * 6.0 : 0.0;
        const double score = 0.6 + 0.1 * o;
        preds.push_back({img.id, {{b.x + shift, b.y, b.w, b.h}, score, label, "detector"}});
        if ((k + o) % 10 != 0) partial.push_back({img.id, {b, score, label, "detector"}});
      }
    }
  }
  save_dataset(gt, dir / "gt.json");
  write_text_file(dir / "pred.jsonl", render_detection_stream(preds));
  write_text_file(dir / "pred_partial.jsonl", render_detection_stream(partial));
}

void write_split(const fs::path& dir, std::mt19937_64& rng) {
  // 209 videos with 3 frames each
  DatasetStore s;
  s.categories = bakery_taxonomy();
  std::int64_t id = 1;
  for (int v = 0; v < 209; ++v) {
    const auto vid = "video" + std::to_string(v);
    for (int f = 0; f < 3; ++f) {
      ImageRecord img{frame_image_id(vid, f), "", ImageDims{1920, 1080}, {}};
      img.file_name = img.id + ".jpg";
      img.meta.video_id = vid;
      img.meta.frame_index = f;
      s.images.push_back(img);
      s.annotations.push_back({id++, img.id, 1 + v % 18,
                               {synthetic::uniform(rng, 0, 1500), synthetic::uniform(rng, 0, 700), 200, 200},
                               std::nullopt, Provenance::pseudo});
    }
  }
  save_dataset(s, dir / "videos.json");

  std::string durations;
  for (int v = 0; v < 5; ++v) {
    durations += dump_line(Json{{"video_id", "video" + std::to_string(v)}, {"duration_s", 10.0 + 2.5 * v}});
  }
  write_text_file(dir / "durations.jsonl", durations);
}

void write_embeddings(const fs::path& dir, std::mt19937_64& rng) {
  std::string text;
  for (int i = 0; i < 20; ++i) {
    Json v = Json::array();
    for (int d = 0; d < 16; ++d) v.push_back(synthetic::uniform(rng, -1, 1) + (d == i % 4 ? 3.0 : 0.0));
    text += dump_line(Json{{"name", "img" + std::to_string(i)}, {"vector", v}});
  }
  write_text_file(dir / "embeddings.jsonl", text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write synthetic fixtures for the bakelabel tool"};
  fs::path out;
  std::uint64_t seed = 7;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--seed", seed, "generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::mt19937_64 rng(seed);
    write_figure(out / "figure");
    write_weak(out / "weak", rng);
    write_videos(out / "videos", rng);
    write_angles(out / "angle", rng);
    write_split(out / "split", rng);
    write_embeddings(out / "embeddings", rng);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::io ? 2 : 1;
  }
  std::cout << "fixtures written to " << out.string() << "\n";
  return 0;
}
