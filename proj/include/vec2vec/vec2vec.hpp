#pragma once

#include "vec2vec/eval.hpp"
#include "vec2vec/graph.hpp"
#include "vec2vec/manifest.hpp"
#include "vec2vec/matrix.hpp"
#include "vec2vec/pipeline.hpp"
#include "vec2vec/rng.hpp"
#include "vec2vec/synth.hpp"
#include "vec2vec/trainer.hpp"
#include "vec2vec/walk.hpp"
