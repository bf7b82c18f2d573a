#include "jspace/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jspace/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "the .hmt reader assumes a little-endian host");

namespace jspace {

namespace {

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::io_failure, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(ErrorCode::io_failure, "cannot open " + path.string() +
                                     " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    raise(ErrorCode::io_failure, "short write to " + path.string());
  }
}

double parse_double(std::string_view field, std::size_t line_no,
                    const char* what) {
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() ||
      !std::isfinite(v)) {
    raise(ErrorCode::malformed_row, "line " + std::to_string(line_no) +
                                        ": bad " + what + " value '" +
                                        std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<LandmarkSet> load_landmark_table(
    const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::istringstream in(bytes);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    raise(ErrorCode::malformed_row, "empty landmark table " + path.string());
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image_id,landmark_index,x,y") {
    raise(ErrorCode::bad_header,
          "expected header image_id,landmark_index,x,y, got '" + line + "'");
  }

  // (image_id, landmark_index) -> point
  std::map<std::string, std::map<int, Point2d>> table;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4 || fields[0].empty()) {
      raise(ErrorCode::malformed_row,
            "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    int index = 0;
    const auto [ptr, ec] = std::from_chars(
        fields[1].data(), fields[1].data() + fields[1].size(), index);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() ||
        index < 1) {
      raise(ErrorCode::malformed_row,
            "line " + std::to_string(line_no) + ": bad landmark_index '" +
                std::string(fields[1]) + "'");
    }
    Point2d p;
    p.x = parse_double(fields[2], line_no, "x");
    p.y = parse_double(fields[3], line_no, "y");
    const std::string image_id(fields[0]);
    if (!table[image_id].emplace(index, p).second) {
      raise(ErrorCode::duplicate_key,
            "duplicate landmark: image_id=" + image_id +
                " landmark_index=" + std::to_string(index));
    }
  }
  if (table.empty()) {
    raise(ErrorCode::malformed_row, "landmark table has no data rows");
  }

  std::size_t n_landmarks = 0;
  std::vector<LandmarkSet> out;
  for (const auto& [image_id, points] : table) {
    LandmarkSet lm;
    lm.image_id = image_id;
    int expected = 1;
    for (const auto& [index, p] : points) {
      if (index != expected) {
        raise(ErrorCode::malformed_row,
              "image_id=" + image_id + " is missing landmark_index " +
                  std::to_string(expected));
      }
      lm.points.push_back(p);
      ++expected;
    }
    if (n_landmarks == 0) {
      n_landmarks = lm.points.size();
    } else if (lm.points.size() != n_landmarks) {
      raise(ErrorCode::malformed_row,
            "image_id=" + image_id + " has " +
                std::to_string(lm.points.size()) + " landmarks, expected " +
                std::to_string(n_landmarks));
    }
    out.push_back(std::move(lm));
  }
  return out;  // std::map iteration is already sorted by image_id
}

void save_landmark_table(const std::filesystem::path& path,
                         std::span<const LandmarkSet> sets) {
  std::vector<const LandmarkSet*> sorted;
  sorted.reserve(sets.size());
  for (const LandmarkSet& s : sets) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const LandmarkSet* a, const LandmarkSet* b) {
              return a->image_id < b->image_id;
            });
  std::string bytes = "image_id,landmark_index,x,y\n";
  for (const LandmarkSet* s : sorted) {
    for (std::size_t k = 0; k < s->points.size(); ++k) {
      bytes += s->image_id;
      bytes += ',';
      bytes += std::to_string(k + 1);
      bytes += ',';
      bytes += format_double(s->points[k].x);
      bytes += ',';
      bytes += format_double(s->points[k].y);
      bytes += '\n';
    }
  }
  write_file_bytes(path, bytes);
}

HeatmapStack load_heatmaps(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) {
    raise(ErrorCode::bad_header, "missing header line in " + path.string());
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception&) {
    raise(ErrorCode::bad_header, "header is not valid JSON in " +
                                     path.string());
  }
  if (!header.is_object() || !header.contains("w") || !header.contains("h") ||
      !header.contains("c") || !header.contains("dtype") ||
      !header.contains("layout") || !header["w"].is_number_integer() ||
      !header["h"].is_number_integer() || !header["c"].is_number_integer()) {
    raise(ErrorCode::bad_header, "header is missing required keys in " +
                                     path.string());
  }
  if (header["dtype"] != "f32le") {
    raise(ErrorCode::unsupported_dtype,
          "unsupported dtype '" + header["dtype"].dump() + "' in " +
              path.string());
  }
  if (header["layout"] != "chw") {
    raise(ErrorCode::bad_header, "unsupported layout '" +
                                     header["layout"].dump() + "' in " +
                                     path.string());
  }
  const int w = header["w"].get<int>();
  const int h = header["h"].get<int>();
  const int c = header["c"].get<int>();
  if (w < 3 || h < 3 || c < 1) {
    raise(ErrorCode::bad_header,
          "invalid dims " + std::to_string(w) + "x" + std::to_string(h) +
              "x" + std::to_string(c) + " in " + path.string());
  }

  const std::size_t expected =
      4u * static_cast<std::size_t>(w) * h * c;
  const std::size_t payload = bytes.size() - newline - 1;
  if (payload != expected) {
    raise(ErrorCode::length_mismatch,
          "payload is " + std::to_string(payload) + " bytes, header implies " +
              std::to_string(expected) + " in " + path.string());
  }

  HeatmapStack stack;
  stack.width = w;
  stack.height = h;
  stack.channels = c;
  stack.values.resize(static_cast<std::size_t>(w) * h * c);
  std::memcpy(stack.values.data(), bytes.data() + newline + 1, expected);
  for (float v : stack.values) {
    if (!std::isfinite(v)) {
      raise(ErrorCode::non_finite_data,
            "non-finite heatmap value in " + path.string());
    }
  }
  return stack;
}

void save_heatmaps(const std::filesystem::path& path, const HeatmapStack& h) {
  h.validate();
  char header[96];
  const int len = std::snprintf(
      header, sizeof(header),
      "{\"w\":%d,\"h\":%d,\"c\":%d,\"dtype\":\"f32le\",\"layout\":\"chw\"}\n",
      h.width, h.height, h.channels);
  std::string bytes(header, static_cast<std::size_t>(len));
  const std::size_t payload = h.values.size() * sizeof(float);
  const std::size_t offset = bytes.size();
  bytes.resize(offset + payload);
  std::memcpy(bytes.data() + offset, h.values.data(), payload);
  write_file_bytes(path, bytes);
}

void FoldSpec::validate() const {
  std::set<std::string> seen;
  auto check = [&](const std::vector<std::string>& ids, const char* split) {
    for (const std::string& id : ids) {
      if (!seen.insert(id).second) {
        raise(ErrorCode::invalid_config,
              "participant " + id + " appears in more than one split (" +
                  split + ")");
      }
    }
  };
  check(train, "train");
  check(val, "val");
  check(test, "test");
}

FoldSpec load_fold_spec(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception&) {
    raise(ErrorCode::bad_header, "fold spec is not valid JSON: " +
                                     path.string());
  }
  if (!j.is_object() || !j.contains("fold") || !j.contains("train") ||
      !j.contains("val") || !j.contains("test")) {
    raise(ErrorCode::bad_header,
          "fold spec needs keys fold/train/val/test: " + path.string());
  }
  FoldSpec spec;
  spec.fold_id = j["fold"].is_string()
                     ? j["fold"].get<std::string>()
                     : j["fold"].dump();
  try {
    spec.train = j["train"].get<std::vector<std::string>>();
    spec.val = j["val"].get<std::vector<std::string>>();
    spec.test = j["test"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    raise(ErrorCode::bad_header,
          "fold spec splits must be arrays of strings: " + path.string());
  }
  spec.validate();
  return spec;
}

}  // namespace jspace
