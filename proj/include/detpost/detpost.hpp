#ifndef DETPOST_DETPOST_HPP
#define DETPOST_DETPOST_HPP

#include "detpost/anchors.hpp"
#include "detpost/dataset_io.hpp"
#include "detpost/evaluation.hpp"
#include "detpost/geometry.hpp"
#include "detpost/nms.hpp"
#include "detpost/overlap.hpp"
#include "detpost/scene_gen.hpp"

#endif  // DETPOST_DETPOST_HPP
