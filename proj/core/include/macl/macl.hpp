#pragma once

#include "macl/checkpoint.hpp"
#include "macl/config.hpp"
#include "macl/corpus_stats.hpp"
#include "macl/dataset.hpp"
#include "macl/encoder.hpp"
#include "macl/error.hpp"
#include "macl/gradient.hpp"
#include "macl/label_set.hpp"
#include "macl/losses.hpp"
#include "macl/metrics.hpp"
#include "macl/random.hpp"
#include "macl/synthetic.hpp"
#include "macl/trainer.hpp"
