#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmo/image.hpp"
#include "fmo/png_io.hpp"
#include "fmo/synth.hpp"
#include "fmo/trajectory.hpp"

namespace fmo {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kManifestVersion = 1;

namespace detail {

inline std::string frame_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%02d.png", prefix, i);
  return buf;
}

inline json color_json(const Color& c) { return json{c[0], c[1], c[2]}; }
inline Color color_from_json(const json& j) {
  return Color{j.at(0).get<double>(), j.at(1).get<double>(),
               j.at(2).get<double>()};
}

inline json object_json(const ObjectSpec& o) {
  json j;
  j["shape"] = o.shape == ShapeKind::disc ? "disc" : "polygon";
  if (o.shape == ShapeKind::polygon) {
    json v = json::array();
    for (const auto& p : o.vertices) v.push_back(json{p[0], p[1]});
    j["vertices"] = v;
  }
  const char* tex[] = {"uniform", "stripes", "checker", "radial"};
  j["texture"] = tex[static_cast<int>(o.texture)];
  j["color1"] = color_json(o.color1);
  j["color2"] = color_json(o.color2);
  j["size"] = o.size;
  return j;
}

inline ObjectSpec object_from_json(const json& j) {
  ObjectSpec o;
  const std::string shape = j.at("shape").get<std::string>();
  o.shape = shape == "disc" ? ShapeKind::disc : ShapeKind::polygon;
  if (o.shape == ShapeKind::polygon)
    for (const auto& p : j.at("vertices"))
      o.vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  const std::string tex = j.at("texture").get<std::string>();
  if (tex == "uniform") o.texture = TextureKind::uniform;
  else if (tex == "stripes") o.texture = TextureKind::stripes;
  else if (tex == "checker") o.texture = TextureKind::checker;
  else if (tex == "radial") o.texture = TextureKind::radial;
  else throw Error("dataset: unknown texture " + tex);
  o.color1 = color_from_json(j.at("color1"));
  o.color2 = color_from_json(j.at("color2"));
  o.size = j.at("size").get<double>();
  return o;
}

inline json trajectory_json(const TrajectorySpec& t) {
  return json{{"start_x", t.start_x}, {"start_y", t.start_y},
              {"dx", t.dx},           {"dy", t.dy},
              {"scale_rate", t.scale_rate},
              {"rotation_deg", t.rotation_deg}};
}

inline TrajectorySpec trajectory_from_json(const json& j) {
  TrajectorySpec t;
  t.start_x = j.at("start_x").get<double>();
  t.start_y = j.at("start_y").get<double>();
  t.dx = j.at("dx").get<double>();
  t.dy = j.at("dy").get<double>();
  t.scale_rate = j.at("scale_rate").get<double>();
  t.rotation_deg = j.at("rotation_deg").get<double>();
  return t;
}

inline json background_json(const BackgroundSpec& b) {
  const char* kinds[] = {"uniform", "gradient", "noise", "image-file"};
  json j;
  j["kind"] = kinds[static_cast<int>(b.kind)];
  j["seed"] = b.seed;
  if (b.color1) j["color1"] = color_json(*b.color1);
  if (b.color2) j["color2"] = color_json(*b.color2);
  if (!b.path.empty()) j["path"] = b.path;
  return j;
}

inline BackgroundSpec background_from_json(const json& j) {
  BackgroundSpec b;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") b.kind = BackgroundKind::uniform;
  else if (kind == "gradient") b.kind = BackgroundKind::gradient;
  else if (kind == "noise") b.kind = BackgroundKind::noise;
  else if (kind == "image-file") b.kind = BackgroundKind::image_file;
  else throw Error("dataset: unknown background kind " + kind);
  b.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("color1")) b.color1 = color_from_json(j.at("color1"));
  if (j.contains("color2")) b.color2 = color_from_json(j.at("color2"));
  if (j.contains("path")) b.path = j.at("path").get<std::string>();
  return b;
}

}  // namespace detail

/// Writes a dataset: `<dir>/manifest.json` plus, per sample,
/// `<id>/I.png`, `<id>/B.png`, `<id>/gt/F_%02d.png`, `<id>/gt/M_%02d.png`
/// (16-bit masks) and `<id>/gt/traj.csv`.
inline void write_dataset(const std::vector<SynthSample>& samples,
                          const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = kManifestVersion;
  if (!samples.empty()) {
    manifest["canvas"] = json{samples.front().I.width, samples.front().I.height};
    manifest["N"] = samples.front().gt_stack.size();
  } else {
    manifest["canvas"] = json{0, 0};
    manifest["N"] = 0;
  }
  json list = json::array();
  for (const SynthSample& s : samples) {
    json entry;
    entry["id"] = s.id;
    entry["seed"] = s.seed;
    entry["object"] = detail::object_json(s.object);
    entry["trajectory"] = detail::trajectory_json(s.trajectory);
    entry["background"] = detail::background_json(s.background);
    list.push_back(entry);

    const fs::path sdir = fs::path(dir) / s.id;
    fs::create_directories(sdir / "gt");
    save_png(s.I, (sdir / "I.png").string());
    save_png(s.B, (sdir / "B.png").string());
    for (std::size_t i = 0; i < s.gt_stack.size(); ++i) {
      save_png(s.gt_stack.renderings[i].F,
               (sdir / "gt" / detail::frame_name("F", static_cast<int>(i))).string());
      save_png(s.gt_stack.renderings[i].M,
               (sdir / "gt" / detail::frame_name("M", static_cast<int>(i))).string(),
               16);
    }
    std::ofstream csv(sdir / "gt" / "traj.csv");
    csv << "index,t,x,y\n";
    char buf[128];
    for (std::size_t i = 0; i < s.gt_traj.points.size(); ++i) {
      const auto& p = s.gt_traj.points[i];
      std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f,%.9f\n", i, p.t, p.x, p.y);
      csv << buf;
    }
  }
  manifest["samples"] = list;
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << manifest.dump(2) << "\n";
}

/// Reads a dataset written by write_dataset. Errors name the offending path.
inline std::vector<SynthSample> read_dataset(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw Error("read_dataset: missing " + mpath.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("read_dataset: malformed " + mpath.string() + ": " + e.what());
  }
  if (!manifest.contains("version") ||
      manifest["version"].get<int>() != kManifestVersion)
    throw Error("read_dataset: unsupported manifest version in " +
                mpath.string());

  std::vector<SynthSample> samples;
  for (const json& entry : manifest.at("samples")) {
    SynthSample s;
    s.id = entry.at("id").get<std::string>();
    s.seed = entry.at("seed").get<std::uint64_t>();
    s.object = detail::object_from_json(entry.at("object"));
    s.trajectory = detail::trajectory_from_json(entry.at("trajectory"));
    s.background = detail::background_from_json(entry.at("background"));

    const fs::path sdir = fs::path(dir) / s.id;
    auto load = [&](const fs::path& p) {
      if (!fs::exists(p)) throw Error("read_dataset: missing " + p.string());
      return load_png(p.string());
    };
    s.I = load(sdir / "I.png");
    s.B = load(sdir / "B.png");
    const int n = manifest.at("N").get<int>();
    std::vector<Rendering> rs;
    for (int i = 0; i < n; ++i) {
      Image F = load(sdir / "gt" / detail::frame_name("F", i));
      Image M = load(sdir / "gt" / detail::frame_name("M", i));
      rs.emplace_back(std::move(F), std::move(M));
    }
    s.gt_stack = RenderingStack(std::move(rs));

    const fs::path tpath = sdir / "gt" / "traj.csv";
    std::ifstream csv(tpath);
    if (!csv) throw Error("read_dataset: missing " + tpath.string());
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      Trajectory::Point p;
      std::size_t idx;
      if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf", &idx, &p.t, &p.x,
                      &p.y) != 4)
        throw Error("read_dataset: malformed row in " + tpath.string());
      s.gt_traj.points.push_back(p);
    }
    // radius is derivable from the masks; recompute it
    s.gt_traj.radius = extract_trajectory(s.gt_stack).radius;
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace fmo
