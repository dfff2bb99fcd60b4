#pragma once

#define LIGHTCD_VERSION "0.1.0"
