// include/lts/data/manifest.h

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

#ifndef LTS_DATA_MANIFEST_H_
#define LTS_DATA_MANIFEST_H_

#include <map>
#include <string>
#include <vector>

#include "lts/common.h"

namespace lts {

// One corpus record. Paths are resolved relative to the manifest's own
// directory when not absolute.
struct ManifestEntry {
  std::string id;
  std::string video_path;
  std::string audio_path;
  int64_t speaker_id = 0;
  std::string split;  // "train", "val", or "test"
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(const std::string& tag) const;
  const ManifestEntry& by_id(const std::string& id) const;
};

// Tab-separated columns: id, video path, audio path, speaker id, split.
// Lines starting with '#' and blank lines are ignored.
Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& manifest);

// Tab-separated columns: id, transcript. Used for reference transcripts.
std::map<std::string, std::string> read_transcripts(const std::string& path);
void write_transcripts(const std::string& path,
                       const std::map<std::string, std::string>& transcripts);

}  // namespace lts

#endif  // LTS_DATA_MANIFEST_H_
