// src/data/manifest.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lts/data/manifest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lts {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, '\t')) fields.push_back(field);
  return fields;
}

std::string resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).string();
}

}  // namespace

std::vector<const ManifestEntry*> Manifest::split(const std::string& tag) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == tag) out.push_back(&e);
  return out;
}

const ManifestEntry& Manifest::by_id(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw DataError(strprintf("manifest: no entry with id '%s'", id.c_str()));
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  require<DataError>(in.good(),
                     strprintf("manifest: cannot open '%s'", path.c_str()));
  fs::path base = fs::path(path).parent_path();
  Manifest m;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_tabs(line);
    require<DataError>(f.size() == 5,
                       strprintf("manifest: line %lld of '%s' has %zu fields, "
                                 "expected 5 (id, video, audio, speaker, split)",
                                 static_cast<long long>(lineno), path.c_str(),
                                 f.size()));
    ManifestEntry e;
    e.id = f[0];
    e.video_path = resolve(base, f[1]);
    e.audio_path = resolve(base, f[2]);
    try {
      e.speaker_id = std::stoll(f[3]);
    } catch (const std::exception&) {
      throw DataError(strprintf("manifest: bad speaker id '%s' on line %lld",
                                f[3].c_str(), static_cast<long long>(lineno)));
    }
    e.split = f[4];
    m.entries.push_back(std::move(e));
  }
  require<DataError>(!m.entries.empty(),
                     strprintf("manifest: '%s' has no entries", path.c_str()));
  return m;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::trunc);
  require<DataError>(out.good(),
                     strprintf("manifest: cannot write '%s'", path.c_str()));
  for (const auto& e : manifest.entries)
    out << e.id << '\t' << e.video_path << '\t' << e.audio_path << '\t'
        << e.speaker_id << '\t' << e.split << '\n';
  require<DataError>(out.good(),
                     strprintf("manifest: write to '%s' failed", path.c_str()));
}

std::map<std::string, std::string> read_transcripts(const std::string& path) {
  std::ifstream in(path);
  require<DataError>(in.good(),
                     strprintf("transcripts: cannot open '%s'", path.c_str()));
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    require<DataError>(tab != std::string::npos,
                       strprintf("transcripts: malformed line in '%s'",
                                 path.c_str()));
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

void write_transcripts(const std::string& path,
                       const std::map<std::string, std::string>& transcripts) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::trunc);
  require<DataError>(out.good(),
                     strprintf("transcripts: cannot write '%s'", path.c_str()));
  for (const auto& [id, text] : transcripts) out << id << '\t' << text << '\n';
  require<DataError>(out.good(),
                     strprintf("transcripts: write to '%s' failed",
                               path.c_str()));
}

}  // namespace lts
