#pragma once

#include "oascen/csv.hpp"
#include "oascen/dataprep.hpp"
#include "oascen/errors.hpp"
#include "oascen/eval.hpp"
#include "oascen/fields.hpp"
#include "oascen/grid.hpp"
#include "oascen/nn.hpp"
#include "oascen/oacgan.hpp"
#include "oascen/opf.hpp"
#include "oascen/parallel.hpp"
#include "oascen/qp.hpp"
#include "oascen/synthetic.hpp"
