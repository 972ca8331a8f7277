#pragma once

#include <vector>

#include "pba/camera.hpp"
#include "pba/errors.hpp"
#include "pba/image.hpp"

namespace pba {

// Ordered monocular frames sharing one camera.
struct Snippet {
  std::vector<ImageGrid> frames;
  Intrinsics K;

  int size() const { return static_cast<int>(frames.size()); }
  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  int channels() const { return frames.empty() ? 1 : frames.front().channels; }

  void validate() const {
    if (frames.size() < 2) throw InvalidInputError("snippet: needs at least 2 frames");
    for (const auto& f : frames) {
      if (!f.same_dims(frames.front()))
        throw InvalidInputError("snippet: frames must share dimensions");
      if (f.width < 1 || f.height < 1)
        throw InvalidInputError("snippet: empty frame");
    }
    K.validate();
  }
};

}  // namespace pba
