#pragma once

#include "hgr/classify.hpp"
#include "hgr/flow.hpp"
#include "hgr/frame.hpp"
#include "hgr/gmm.hpp"
#include "hgr/pipeline.hpp"
#include "hgr/shadow.hpp"
#include "hgr/synth.hpp"
