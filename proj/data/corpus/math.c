int calls = 0;

void report(int code) {
  calls = calls + code;
}

int average(int *a, int n) {
  int s = 0;
  int i;
  for (i = 0; i < n; i = i + 1) {
    s = s + a[i];
  }
  return s / n;
}

int ratio(int x, int y) {
  int d = x - y;
  return 100 / d;
}

int safe_div(int a, int b) {
  if (b != 0) {
    return a / b;
  }
  return 0;
}

int classify(int x) {
  int r = 0;
  if (x > 100) {
    r = 2;
  }
  return r;
}

int norm(int n) {
  if (n < 0) {
    n = 0;
  }
  return n;
}

int dispatch(int flag) {
  if (flag > 2) {
    report(flag);
  }
  return flag;
}

int countdown(int k) {
  int steps = 0;
  while (k > 0) {
    k = k - 1;
    steps = steps + 1;
  }
  return steps;
}
