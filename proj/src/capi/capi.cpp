extern "C" int bs_placeholder(void){return 0;}
