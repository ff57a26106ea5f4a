#ifndef MISCLASS_VERSION_HPP
#define MISCLASS_VERSION_HPP

#define MISCLASS_VERSION "0.1.0"

#endif
