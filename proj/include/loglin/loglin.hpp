#pragma once

#include "loglin/common.hpp"
#include "loglin/space.hpp"
#include "loglin/graph.hpp"
#include "loglin/model.hpp"
#include "loglin/param.hpp"
#include "loglin/prior.hpp"
#include "loglin/induced.hpp"
#include "loglin/decomposable.hpp"
#include "loglin/evidence.hpp"
#include "loglin/io.hpp"
