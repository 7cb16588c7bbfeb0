#include "ressm/io/dataset_io.hpp"

#include "ressm/core/error.hpp"
#include "ressm/io/tensor_file.hpp"

#include <json.hpp>

namespace ressm::io {
namespace {

using nlohmann::json;

std::string unit_name(int r, int i, int j) {
  return "(r=" + std::to_string(r) + ", i=" + std::to_string(i) +
         ", j=" + std::to_string(j) + ")";
}

std::string segment_path(int r, int i, int j) {
  return "r" + std::to_string(r) + "/i" + std::to_string(i) + "/j" +
         std::to_string(j) + ".rssm";
}

}  // namespace

model::HierDataset read_dataset(const std::filesystem::path& manifest) {
  json doc;
  try {
    doc = json::parse(read_file(manifest));
  } catch (const json::exception& e) {
    throw IoError(manifest.string() + ": malformed manifest: " + e.what());
  }
  if (doc.value("format", "") != "ressm-dataset") {
    throw IoError(manifest.string() + ": not a dataset manifest");
  }
  const auto base = manifest.parent_path();
  model::HierDataset ds;
  try {
    ds.P = doc.at("P").get<Index>();
    ds.K = doc.at("K").get<Index>();
    std::vector<std::vector<int>> counts;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> units;
    const auto& groups = doc.at("groups");
    for (std::size_t r = 0; r < groups.size(); ++r) {
      counts.emplace_back();
      const auto& subjects = groups[r].at("subjects");
      for (std::size_t i = 0; i < subjects.size(); ++i) {
        const auto& segs = subjects[i].at("segments");
        counts.back().push_back(static_cast<int>(segs.size()));
        for (std::size_t j = 0; j < segs.size(); ++j) {
          files.push_back(base / segs[j].get<std::string>());
          units.push_back(unit_name(static_cast<int>(r), static_cast<int>(i),
                                    static_cast<int>(j)));
        }
      }
    }
    ds.layout = model::HierLayout(counts);
    for (std::size_t s = 0; s < files.size(); ++s) {
      if (!std::filesystem::exists(files[s])) {
        throw IoError(files[s].string() + ": missing segment file for " + units[s]);
      }
      Matrix y;
      try {
        y = read_matrix(files[s]);
      } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + " for segment " + units[s]);
      }
      if (y.rows() != ds.P || y.cols() != ds.K) {
        throw ValidationError("segment " + units[s] + " in " + files[s].string() +
                              " is " + std::to_string(y.rows()) + " x " +
                              std::to_string(y.cols()) + ", expected " +
                              std::to_string(ds.P) + " x " + std::to_string(ds.K));
      }
      ds.Y.push_back(std::move(y));
    }
  } catch (const json::exception& e) {
    throw IoError(manifest.string() + ": malformed manifest: " + e.what());
  }
  return ds;
}

std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const model::HierDataset& data) {
  json groups = json::array();
  for (int r = 0; r < data.layout.groups(); ++r) {
    json subjects = json::array();
    for (int i = 0; i < data.layout.subjects(r); ++i) {
      json segs = json::array();
      for (int j = 0; j < data.layout.segments(r, i); ++j) {
        const auto rel = segment_path(r, i, j);
        write_matrix(dir / rel, data.segment(r, i, j));
        segs.push_back(rel);
      }
      subjects.push_back({{"segments", segs}});
    }
    groups.push_back({{"subjects", subjects}});
  }
  const json doc = {{"format", "ressm-dataset"}, {"version", 1},
                    {"P", data.P},               {"K", data.K},
                    {"groups", groups}};
  const auto path = dir / "manifest.json";
  write_file_atomic(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace ressm::io
