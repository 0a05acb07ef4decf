#pragma once

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/experiment.hpp"
#include "pml/grid.hpp"
#include "pml/io.hpp"
#include "pml/loss.hpp"
#include "pml/manifest.hpp"
#include "pml/metrics.hpp"
#include "pml/model.hpp"
#include "pml/pseudo.hpp"
#include "pml/random.hpp"
#include "pml/text.hpp"
#include "pml/trainer.hpp"
