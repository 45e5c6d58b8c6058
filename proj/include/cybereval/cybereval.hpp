#pragma once

#include "cybereval/cvss.hpp"
#include "cybereval/error.hpp"
#include "cybereval/extraction.hpp"
#include "cybereval/grpo.hpp"
#include "cybereval/harness/config.hpp"
#include "cybereval/harness/dataset.hpp"
#include "cybereval/harness/endpoint.hpp"
#include "cybereval/harness/prompts.hpp"
#include "cybereval/harness/report.hpp"
#include "cybereval/harness/runner.hpp"
#include "cybereval/reward.hpp"
#include "cybereval/techniques.hpp"
