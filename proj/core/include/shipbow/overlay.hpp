#pragma once

#include "shipbow/pipeline.hpp"

namespace shipbow {

/// Copy of the prepared image with every detected keypoint marked in yellow,
/// first-pass selections circled in green and enlarged (augmented) entries
/// boxed in magenta.
RgbImage render_keypoint_overlay(const PreparedImage& prepared, const SelectionResult& selection,
                                 const SelectionParams& params);

}  // namespace shipbow
