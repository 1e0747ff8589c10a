int leak_sum(int n) {
  int *tmp = malloc(4);
  tmp[0] = n;
  if (n > 10) return tmp[0];
  free(tmp);
  return 0;
}

int fill_bytes(int n) {
  char *b = malloc(n);
  if (n > 0) b[0] = 'x';
  return n;
}

int scratch(int n) {
  int *t = malloc(8);
  t[0] = n;
  n = t[0] * 2;
  free(t);
  return n;
}
